#pragma once

#include "spheroid/analysis.hpp"
#include "spheroid/evolution.hpp"
#include "spheroid/rates.hpp"
#include "spheroid/stationary.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spheroid {

// Everything a CLI run needs. See docs/config.md for the file format.
struct RunConfig {
    RateModel model = RateModel::default_model();
    SolverConfig solver;

    // Relaxation controls; dt, scheme and Newton tolerance follow `solver`.
    StationaryOptions stationary;
    double v1_tol = 1e-6;         // acceptance bound for |v*(1)|
    double transport_tol = 1e-4;  // acceptance bound for the transport residual

    // Single trajectory perturbation (simulate).
    double delta = 0.01;
    Shape shape = Shape::Polynomial;
    std::uint64_t seed = 1;

    ExperimentConfig experiment;
    std::vector<double> bound_z{-1.0, 0.0, 1.0};
    std::vector<ConvergenceKind> convergence_studies{
        ConvergenceKind::Diffusion, ConvergenceKind::Transport, ConvergenceKind::Time};
    ConvergenceSpec convergence;  // kind is taken from convergence_studies

    std::string out_dir = "out";
    std::string resume;           // snapshot to resume simulate from
    std::string stationary_path;  // precomputed stationary snapshot, optional

    StationaryOptions stationary_options() const;
    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Full explicit rendering; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

// Sets one value addressed as "section.key", e.g. "solver.eps" or
// "rates.K_Q.amplitude", with the same parsing and validation as the file.
void set_config_value(RunConfig& config, const std::string& dotted_key, const std::string& value);

// CRC-32 of the serialized configuration without paths and t_end, recorded
// in snapshots.
std::uint32_t config_hash(const RunConfig& config);

// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

} // namespace spheroid
