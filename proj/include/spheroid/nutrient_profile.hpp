#pragma once

#include "spheroid/grid.hpp"
#include "spheroid/rates.hpp"

#include <string>
#include <vector>

namespace spheroid {

// Solution m(.; z) of the frozen-radius nutrient problem
//   c'' + (2/r) c' = e^{2z} F(c),  c'(0) = 0,  c(1) = 1,
// together with m_r and the sensitivity m_z.
struct MProfile {
    double z = 0.0;
    Grid grid{3};
    std::vector<double> m;
    std::vector<double> m_r;
    std::vector<double> m_z;
    int newton_iterations = 0;
    double residual = 0.0;  // max norm of the h^2-scaled difference equations
};

struct NewtonOptions {
    double tol = 1e-12;
    int max_iterations = 50;
};

// Second-order finite differences with the symmetric limit 3 c''(0) at the
// origin, damped Newton from m == 1. m_z solves the linearized problem
//   c_z'' + (2/r) c_z' = e^{2z} F'(c) c_z + 2 e^{2z} F(c),  c_z'(0) = 0, c_z(1) = 0
// on the same stencil, so it is the exact derivative of the discrete m.
MProfile solve_m(const RateModel& model, double z, const Grid& grid,
                 const NewtonOptions& options = {});

// Values of m only (no sensitivity), bit-identical to solve_m(...).m.
std::vector<double> solve_m_values(const RateModel& model, double z, const Grid& grid,
                                   const NewtonOptions& options = {});

struct BoundCheck {
    std::string name;   // "(1) 0 < m <= 1", ...
    double worst_slack; // min over nodes of (bound gap) / F(1) e^{2z}
    int worst_node;
    bool passed;
};

struct Lemma31Entry {
    double z;
    std::vector<BoundCheck> bounds;
    bool passed() const;
};

struct Lemma31Report {
    std::vector<Lemma31Entry> entries;
    double relative_tolerance;
    bool all_passed() const;
    std::string to_text() const;
};

// Evaluates the seven a-priori bounds on m, m_r, m_z, m_rr at every node for
// each z. Slacks are relative to F(1) e^{2z} (absolute when that vanishes); a
// bound passes when its worst slack is >= -relative_tolerance.
Lemma31Report check_lemma31(const RateModel& model, const std::vector<double>& z_values,
                            const Grid& grid, double relative_tolerance = 1e-8);

// max_i | m_r(r_i) - (e^{2z} / r_i^2) int_0^{r_i} F(m) rho^2 drho |
double flux_identity_residual(const MProfile& profile, const RateModel& model);

} // namespace spheroid
