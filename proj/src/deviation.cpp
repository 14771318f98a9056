#include "spheroid/deviation.hpp"

#include "spheroid/error.hpp"
#include "spheroid/stationary.hpp"

#include <algorithm>
#include <cmath>

namespace spheroid {

std::array<double, kDecayNormCount> decay_norms(const DeviationRecord& rec) {
    return {rec.c_dev, rec.cr_dev, rec.ct, rec.p_dev, rec.pr_weighted, rec.pt, rec.z_dev, rec.zdot};
}

DeviationRecord deviation_norms(const State& state, const State* prev,
                                const StationarySolution& stationary, const MProfile& m_profile) {
    const Grid& grid = state.grid;
    const int n = grid.size();
    if (!(stationary.grid == grid) || !(m_profile.grid == grid) ||
        (prev && !(prev->grid == grid)))
        throw DomainError("deviation_norms: grid mismatch");
    if (static_cast<int>(state.c.size()) != n || static_cast<int>(state.p.size()) != n ||
        static_cast<int>(stationary.c.size()) != n || static_cast<int>(stationary.p.size()) != n)
        throw DomainError("deviation_norms: array length does not match the grid");

    DeviationRecord rec;
    rec.t = state.t;
    rec.c_dev = max_abs_diff(state.c, stationary.c);
    rec.p_dev = max_abs_diff(state.p, stationary.p);
    rec.z_dev = std::abs(state.z - stationary.z);
    rec.eta = max_abs_diff(state.c, m_profile.m);

    rec.cr_dev = max_abs_diff(derivative(grid, state.c), derivative(grid, stationary.c));

    // p has no symmetry condition imposed, but the weight vanishes at both
    // ends so the end stencils do not enter the norm.
    const std::vector<double> pr = derivative(grid, state.p, OriginDerivative::OneSided);
    const std::vector<double> pr_star = derivative(grid, stationary.p, OriginDerivative::OneSided);
    for (int i = 1; i + 1 < n; ++i) {
        const double r = grid.r(i);
        rec.pr_weighted = std::max(rec.pr_weighted, r * (1.0 - r) * std::abs(pr[i] - pr_star[i]));
    }

    if (prev) {
        const double dt = state.t - prev->t;
        if (dt > 0.0) {
            rec.ct = max_abs_diff(state.c, prev->c) / dt;
            rec.pt = max_abs_diff(state.p, prev->p) / dt;
            rec.zdot = std::abs(state.z - prev->z) / dt;
        }
    }
    return rec;
}

} // namespace spheroid
