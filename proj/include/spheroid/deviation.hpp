#pragma once

#include "spheroid/nutrient_profile.hpp"
#include "spheroid/state.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace spheroid {

struct StationarySolution;

// Distances of a state from the stationary solution, in the norms of the
// exponential decay estimates.
struct DeviationRecord {
    double t = 0.0;
    double c_dev = 0.0;        // max |c - c*|
    double cr_dev = 0.0;       // max |c_r - c*'|
    double ct = 0.0;           // max |c_t|, backward difference
    double p_dev = 0.0;        // max |p - p*|
    double pr_weighted = 0.0;  // max r(1 - r) |p_r - p*'|
    double pt = 0.0;           // max |p_t|, backward difference
    double z_dev = 0.0;        // |z - z*|
    double zdot = 0.0;         // |z_t|, backward difference
    double eta = 0.0;          // max |c - m(.; z)|
};

inline constexpr std::size_t kDecayNormCount = 8;
// Norms covered by the decay estimates (eta is a diagnostic and excluded).
inline constexpr std::array<std::string_view, kDecayNormCount> kDecayNormNames{
    "c_dev", "cr_dev", "ct", "p_dev", "pr_weighted", "pt", "z_dev", "zdot"};

std::array<double, kDecayNormCount> decay_norms(const DeviationRecord& rec);

// Spatial derivatives by central differences, time derivatives by backward
// difference against `prev` (zero without it). `m_profile` must be m(.; state.z).
// Throws DomainError when the grids differ.
DeviationRecord deviation_norms(const State& state, const State* prev,
                                const StationarySolution& stationary,
                                const MProfile& m_profile);

} // namespace spheroid
