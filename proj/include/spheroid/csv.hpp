#pragma once

#include "spheroid/analysis.hpp"
#include "spheroid/evolution.hpp"
#include "spheroid/stationary.hpp"

#include <string>
#include <vector>

namespace spheroid {

// Fixed column order, shortest round-trip decimal formatting. Missing values
// are written as empty fields.

std::string timeseries_header();
std::string timeseries_row(const TimeRecord& rec);
void write_timeseries(const std::string& path, const std::vector<TimeRecord>& series);
void append_timeseries(const std::string& path, const std::vector<TimeRecord>& series);
// Drops rows with t > t_keep from an existing time-series file (used before
// appending a resumed run). Creates the file with a header when absent.
void truncate_timeseries(const std::string& path, double t_keep);

void write_profile(const std::string& path, const StationarySolution& sol);

std::string stability_header();
void write_stability_report(const std::string& path, const StabilityReport& report);

// Minimum observed order gated by the convergence command: 1.8 for the
// diffusion and time studies, 1.8 for c and 1.5 for p under transport. NaN
// for fields that are reported only.
double convergence_threshold(ConvergenceKind kind, const std::string& field);

void write_convergence(const std::string& path, const std::vector<ConvergenceResult>& results);

// Rows of a CSV file split on commas (no quoting; the files written here never
// need it).
std::vector<std::vector<std::string>> read_csv(const std::string& path);

} // namespace spheroid
