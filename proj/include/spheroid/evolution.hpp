#pragma once

#include "spheroid/deviation.hpp"
#include "spheroid/grid.hpp"
#include "spheroid/nutrient_profile.hpp"
#include "spheroid/rates.hpp"
#include "spheroid/state.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spheroid {

struct StationarySolution;

struct VelocityField {
    std::vector<double> v;
    std::vector<double> w;  // v - r v(1)
    double v1 = 0.0;
};

enum class Interpolation { Pchip, Linear };

std::string_view interpolation_name(Interpolation kind);
Interpolation interpolation_from_name(std::string_view name);

struct SolverConfig {
    double eps = 0.0;  // 0 selects the quasi-static nutrient
    double dt = 0.025;
    double t_end = 60.0;
    Grid grid{201};
    // 1: velocity frozen over the step, linearized backward Euler nutrient.
    // 2: predictor-corrector coupling, TR-BDF2 nutrient. Second order in dt.
    int splitting_order = 2;
    Interpolation interpolation = Interpolation::Pchip;
    int output_every = 10;        // steps between time-series records
    int snapshot_every = 0;       // records between snapshots, 0 = final only
    double newton_tol = 1e-12;
    double clip_tol = 1e-10;      // range violations above this are logged as warnings
    double early_stop_floor = 0;  // stop once every deviation norm is below this; 0 = never
    bool strict_boundary_p = false;  // admissibility requires p(1) = 1

    void validate() const;
    bool operator==(const SolverConfig&) const = default;
};

struct ClipEvent {
    double t;
    char field;  // 'c' or 'p'
    int node;
    double value;  // value before clipping
};

struct ClipLog {
    std::vector<ClipEvent> events;
    double max_violation = 0.0;
    // Events whose violation exceeds the tolerance.
    std::size_t beyond(double tol) const;
};

// v(r) = r^{-2} int_0^r g(c, p) rho^2 drho, v(0) = 0, w = v - r v(1).
VelocityField velocity_from_state(const RateModel& model, const State& state);

// One linearized backward Euler step of the nutrient equation with z and v(1)
// frozen at the step start. Requires eps > 0.
std::vector<double> nutrient_step(const RateModel& model, const State& state,
                                  const VelocityField& vel, double dt, double eps);

// c <- m(.; z).
std::vector<double> quasi_static_update(const RateModel& model, const State& state,
                                        double newton_tol = 1e-12);

// Semi-Lagrangian step for p_t + w p_r = f(c, p) with w and c frozen at the
// step start.
std::vector<double> transport_step(const RateModel& model, const State& state,
                                   const VelocityField& vel, double dt,
                                   Interpolation interpolation = Interpolation::Pchip);

// Heun step for z' = v1(t, z).
double boundary_radius_step(double z, double t, double dt,
                            const std::function<double(double t, double z)>& v1);

struct StepDiagnostics {
    double v1 = 0.0;  // v(1) at the step start
    std::vector<ClipEvent> clips;
};

State step(const RateModel& model, const State& state, const SolverConfig& config,
           StepDiagnostics* diagnostics = nullptr);

struct TimeRecord {
    double t, R, z, v1;
    DeviationRecord deviation;
};

struct SimulationResult {
    std::vector<TimeRecord> series;
    State final_state;
    ClipLog clips;
    bool early_stopped = false;
    bool admissible = true;
    std::vector<std::string> warnings;
};

struct SimulationHooks {
    // Record emitted at every output time (after it is appended to the series).
    std::function<void(const TimeRecord&, const State&)> on_record;
    // Periodic and final snapshots, and the last good state before a fatal
    // numeric error.
    std::function<void(const State&)> on_snapshot;
};

// Runs from `init` to t_end. When `previous` is given it is the state at the
// previous output time (used for time differences); the record at the initial
// time is then not emitted, so a resumed run continues an existing series.
SimulationResult simulate(const RateModel& model, const State& init, const SolverConfig& config,
                          const StationarySolution& stationary,
                          const SimulationHooks& hooks = {},
                          const std::optional<State>& previous = std::nullopt);

} // namespace spheroid
