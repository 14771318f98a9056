#pragma once

#include "spheroid/evolution.hpp"
#include "spheroid/grid.hpp"
#include "spheroid/rates.hpp"

#include <vector>

namespace spheroid {

struct StationarySolution {
    double z = 0.0;
    Grid grid{3};
    std::vector<double> c;
    std::vector<double> p;
    std::vector<double> v;

    // Diagnostics.
    double v1_residual = 0.0;        // |v*(1)|
    double transport_residual = 0.0; // max over interior nodes |-v* p*' + f(c*, p*)|
    double c_mismatch = 0.0;         // max |c* - m(.; z*)|
    double z_direct = 0.0;           // z* from the shooting construction
    double relaxation_time = 0.0;
    long relaxation_steps = 0;

    double method_gap() const;
    // The state (t = 0, z*, c*, p*).
    State as_state() const;
};

struct StationaryOptions {
    double tol = 1e-10;            // pseudo-time increment bound
    double dt = 0.025;             // relaxation step, should match the simulation dt
    double t_max = 5000.0;         // relaxation horizon
    int splitting_order = 2;
    Interpolation interpolation = Interpolation::Pchip;
    double z_init = 0.0;           // relaxation start: z, c = m(.; z), p = equilibrium
    double z_lo = -3.0;            // bracket for the shooting construction
    double z_hi = 4.0;
    double agreement_tol = 1e-4;   // allowed |z*_relaxation - z*_shooting|
    int consecutive = 10;          // quiet steps required before stopping
    double newton_tol = 1e-12;

    bool operator==(const StationaryOptions&) const = default;
};

// Result of the inward shooting construction for one trial z: V(r) = r^2 v(r)
// is integrated from r = 1 with V(1) = 0 and p(1) the equilibrium fraction.
struct ShootingResult {
    double z = 0.0;
    double mismatch = 0.0;   // V(0); zero at the stationary radius
    bool crossed = false;    // V reached 0 before the origin (mismatch > 0)
    std::vector<double> p;   // p on the grid (only filled when !crossed)
};

ShootingResult shoot_stationary(const RateModel& model, double z, const Grid& grid);

// Bisection on the sign of V(0; z) over [z_lo, z_hi]. Throws ConvergenceError
// when the sign does not change over the bracket.
ShootingResult solve_stationary_direct(const RateModel& model, const Grid& grid,
                                       const StationaryOptions& options = {});

// Pseudo-time relaxation of the eps = 0 system from admissible data, cross
// checked against the shooting construction. Throws ConvergenceError when the
// relaxation does not settle within t_max.
StationarySolution solve_stationary(const RateModel& model, const Grid& grid,
                                    const StationaryOptions& options = {});

// Fills the residual diagnostics of a candidate stationary state.
void compute_stationary_residuals(const RateModel& model, StationarySolution& sol,
                                  double newton_tol = 1e-12);

} // namespace spheroid
