#pragma once

#include "spheroid/deviation.hpp"
#include "spheroid/evolution.hpp"
#include "spheroid/stationary.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spheroid {

// Perturbation catalog for admissible initial data. Every shape has
// phi'(0) = 0 and phi(1) = 0, so c0(1) = 1 and c0'(0) = 0 are preserved.
//   polynomial  phi_c = (1 - r^2) / 2,           psi_p = -phi_c, xi = 1
//   cosine      phi_c = cos(pi r / 2) / 2,       psi_p = -phi_c, xi = -1
//   random      sum_k a_k cos((k - 1/2) pi r),   seeded, |phi| <= 1/2, xi in [-1, 1]
enum class Shape { Polynomial, Cosine, Random };

std::string_view shape_name(Shape shape);
Shape shape_from_name(std::string_view name);

struct InitCondition {
    std::string name;
    double defect;  // size of the violation, 0 when satisfied
    bool passed;
};

struct AdmissibleInit {
    State state;
    int clamped_nodes = 0;
    std::vector<InitCondition> conditions;
    std::vector<std::string> warnings;
    bool all_passed() const;
};

// c0 = clamp(c* + delta phi_c), p0 = clamp(p* + delta psi_p), z0 = z* + delta xi.
// With strict_boundary_p the condition p0(1) = 1 is part of the check list.
AdmissibleInit admissible_init(const StationarySolution& stationary, double delta, Shape shape,
                               std::uint64_t seed, bool strict_boundary_p = false);

// Same perturbation applied to an arbitrary base state on any grid.
State perturbed_state(const State& base, double delta, Shape shape, std::uint64_t seed,
                      int* clamped_nodes = nullptr);

struct DecayFit {
    double mu = 0.0;  // fitted rate
    double C = 0.0;   // prefactor
    double t1 = 0.0;  // fit window
    double t2 = 0.0;
    double r_squared = 0.0;
    int points = 0;
};

struct DecayFitOptions {
    double tail_fraction = 0.5;  // fraction of above-floor samples used, from the end
    double floor = 0.0;          // samples <= floor are treated as noise
    int min_points = 5;
    bool operator==(const DecayFitOptions&) const = default;
};

// Least squares for log y = log C - mu t over the tail window. Throws
// InsufficientDataError when fewer than min_points usable samples remain.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y,
                   const DecayFitOptions& options = {});

struct ExperimentConfig {
    std::vector<double> eps_list{0.0, 0.01, 0.05};
    std::vector<double> delta_list{0.005, 0.01};
    std::vector<Shape> shapes{Shape::Polynomial, Shape::Cosine};
    std::vector<std::uint64_t> seeds{1};
    DecayFitOptions fit{0.5, 1e-8, 5};
    double early_stop_floor = 1e-8;  // per-cell early stop, 0 disables
    int max_threads = 0;             // 0 = hardware concurrency
    bool operator==(const ExperimentConfig&) const = default;
};

struct StabilityCell {
    double eps = 0.0;
    double delta = 0.0;
    Shape shape = Shape::Polynomial;
    std::uint64_t seed = 0;
    std::array<std::optional<DecayFit>, kDecayNormCount> fits{};
    double crossing_time = -1.0;  // first output time with every norm below delta / 10, -1 if never
    bool converged = false;       // crossing reached and the final record is below delta / 10
    std::string status;           // ok, no-decay, skipped, failed: <reason>
    std::vector<TimeRecord> series;

    bool decay_observed() const;
};

struct StabilityReport {
    std::vector<StabilityCell> cells;  // sorted by (eps, delta, shape, seed)
    // Largest eps for which every cell showed decay; -1 when none did. An
    // empirical proxy only.
    double eps0_proxy = -1.0;
    bool all_decayed() const;
    // Largest relative spread of mu over the delta values, per (eps, shape,
    // seed, norm), ignoring delta = 0 rows.
    double max_mu_spread() const;
};

// Runs one simulation per (eps, delta, shape, seed). Cells run concurrently;
// `on_cell` is invoked from the worker thread that finished the cell.
StabilityReport stability_experiment(const RateModel& model, const SolverConfig& base,
                                     const StationarySolution& stationary,
                                     const ExperimentConfig& experiment,
                                     const std::function<void(const StabilityCell&)>& on_cell = {});

enum class ConvergenceKind {
    Diffusion,  // h-refinement, all rates zero except F, eps > 0
    Transport,  // h-refinement, configured model
    Time        // dt-refinement at fixed grid
};

std::string_view convergence_kind_name(ConvergenceKind kind);
ConvergenceKind convergence_kind_from_name(std::string_view name);

struct ConvergenceSpec {
    ConvergenceKind kind = ConvergenceKind::Transport;
    int levels = 4;
    int n0 = 51;         // coarsest grid for h-refinement; N_k = (n0 - 1) 2^k + 1
    double dt0 = 0.1;    // coarsest dt for dt-refinement; dt_k = dt0 / 2^k
    double t_end = 2.0;
    double delta = 0.05; // initial perturbation amplitude
    // Time step used by h-refinement and grid used by dt-refinement come from
    // the base config.
    bool operator==(const ConvergenceSpec&) const = default;
};

struct FieldOrders {
    std::string field;                 // c, p, z
    std::vector<double> differences;   // ||u_{k+1} - u_k|| on the coarser grid
    std::vector<double> orders;        // log2(d_k / d_{k+1})
    bool inconclusive = false;         // differences not strictly decreasing
    // Order of the finest pair, NaN when unavailable.
    double finest_order() const;
};

struct ConvergenceResult {
    ConvergenceKind kind;
    std::vector<int> grid_sizes;
    std::vector<double> time_steps;
    std::vector<FieldOrders> fields;
    const FieldOrders& field(std::string_view name) const;
};

ConvergenceResult self_convergence(const RateModel& model, const SolverConfig& base,
                                   const ConvergenceSpec& spec);

} // namespace spheroid
