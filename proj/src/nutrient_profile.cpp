#include "spheroid/nutrient_profile.hpp"

#include "spheroid/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace spheroid {

namespace {

struct Jacobian {
    std::vector<double> lower, diag, upper;
};

// Residual of the h^2-scaled difference equations and their Jacobian.
double assemble(const RateModel& model, double e2z, const Grid& grid,
                const std::vector<double>& c, std::vector<double>& residual, Jacobian& jac) {
    const int n = grid.size();
    const double h = grid.spacing();
    const double h2 = h * h;
    residual.assign(n, 0.0);
    jac.lower.assign(n, 0.0);
    jac.diag.assign(n, 0.0);
    jac.upper.assign(n, 0.0);

    const RateValue F0 = model.eval(RateId::F, c[0]);
    residual[0] = 6.0 * (c[1] - c[0]) - h2 * e2z * F0.value;
    jac.diag[0] = -6.0 - h2 * e2z * F0.derivative;
    jac.upper[0] = 6.0;

    for (int i = 1; i + 1 < n; ++i) {
        const double hr = h / grid.r(i);
        const RateValue F = model.eval(RateId::F, c[i]);
        residual[i] = (1.0 + hr) * c[i + 1] - 2.0 * c[i] + (1.0 - hr) * c[i - 1] -
                      h2 * e2z * F.value;
        jac.lower[i] = 1.0 - hr;
        jac.diag[i] = -2.0 - h2 * e2z * F.derivative;
        jac.upper[i] = 1.0 + hr;
    }
    residual[n - 1] = c[n - 1] - 1.0;
    jac.diag[n - 1] = 1.0;
    return max_abs(residual);
}

std::vector<double> newton_m(const RateModel& model, double z, const Grid& grid,
                             const NewtonOptions& options, int& iterations, double& residual_norm,
                             Jacobian& jac) {
    const int n = grid.size();
    const double e2z = std::exp(2.0 * z);
    std::vector<double> c(n, 1.0);
    std::vector<double> res;
    residual_norm = assemble(model, e2z, grid, c, res, jac);
    iterations = 0;
    while (residual_norm > options.tol) {
        if (iterations >= options.max_iterations)
            throw ConvergenceError("nutrient BVP Newton iteration did not converge", residual_norm);
        ++iterations;
        std::vector<double> step = res;
        for (double& s : step) s = -s;
        solve_tridiagonal(jac.lower, jac.diag, jac.upper, step);

        // Backtracking on the residual norm.
        double lambda = 1.0;
        std::vector<double> trial(n);
        std::vector<double> trial_res;
        Jacobian trial_jac;
        double trial_norm = 0.0;
        for (int k = 0; k < 30; ++k) {
            for (int i = 0; i < n; ++i) trial[i] = c[i] + lambda * step[i];
            bool inside = true;
            for (double v : trial)
                if (!(v >= model.c_min() - RateModel::kDomainMargin &&
                      v <= model.c_max() + RateModel::kDomainMargin))
                    inside = false;
            if (inside) {
                trial_norm = assemble(model, e2z, grid, trial, trial_res, trial_jac);
                if (trial_norm < residual_norm || trial_norm <= options.tol) break;
            }
            lambda *= 0.5;
        }
        if (!(trial_norm < residual_norm || trial_norm <= options.tol)) {
            // No decrease possible at rounding level.
            if (residual_norm <= 1e3 * options.tol) break;
            throw ConvergenceError("nutrient BVP Newton step failed to reduce the residual",
                                   residual_norm);
        }
        c.swap(trial);
        res.swap(trial_res);
        jac = std::move(trial_jac);
        residual_norm = trial_norm;
    }
    if (!std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); }))
        throw NumericError("non-finite value in nutrient BVP solution");
    c[n - 1] = 1.0;
    return c;
}

} // namespace

std::vector<double> solve_m_values(const RateModel& model, double z, const Grid& grid,
                                   const NewtonOptions& options) {
    int iterations = 0;
    double residual = 0.0;
    Jacobian jac;
    return newton_m(model, z, grid, options, iterations, residual, jac);
}

MProfile solve_m(const RateModel& model, double z, const Grid& grid,
                 const NewtonOptions& options) {
    MProfile out;
    out.z = z;
    out.grid = grid;
    Jacobian jac;
    out.m = newton_m(model, z, grid, options, out.newton_iterations, out.residual, jac);
    out.m_r = derivative(grid, out.m, OriginDerivative::Symmetric);

    // Sensitivity: J m_z = -dR/dz with R the scaled residual; the Jacobian is
    // re-assembled at the converged iterate.
    const int n = grid.size();
    const double e2z = std::exp(2.0 * z);
    const double h2 = grid.spacing() * grid.spacing();
    std::vector<double> res;
    assemble(model, e2z, grid, out.m, res, jac);
    std::vector<double> rhs(n);
    for (int i = 0; i + 1 < n; ++i) rhs[i] = 2.0 * h2 * e2z * model.value(RateId::F, out.m[i]);
    rhs[n - 1] = 0.0;
    solve_tridiagonal(jac.lower, jac.diag, jac.upper, rhs);
    rhs[n - 1] = 0.0;
    out.m_z = std::move(rhs);
    return out;
}

bool Lemma31Entry::passed() const {
    return std::all_of(bounds.begin(), bounds.end(), [](const BoundCheck& b) { return b.passed; });
}

bool Lemma31Report::all_passed() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const Lemma31Entry& e) { return e.passed(); });
}

std::string Lemma31Report::to_text() const {
    std::ostringstream os;
    for (const auto& e : entries) {
        os << "z = " << e.z << '\n';
        for (const auto& b : e.bounds) {
            os << "  " << (b.passed ? "pass" : "FAIL") << "  " << std::left << std::setw(40)
               << b.name << " worst slack " << std::scientific << std::setprecision(3)
               << b.worst_slack << " at node " << b.worst_node << std::defaultfloat << '\n';
        }
    }
    os << (all_passed() ? "all bounds hold" : "bound violation detected") << " (tolerance "
       << relative_tolerance << ")\n";
    return os.str();
}

Lemma31Report check_lemma31(const RateModel& model, const std::vector<double>& z_values,
                            const Grid& grid, double relative_tolerance) {
    Lemma31Report report;
    report.relative_tolerance = relative_tolerance;
    const double F1 = model.value(RateId::F, 1.0);
    for (double z : z_values) {
        const MProfile prof = solve_m(model, z, grid);
        const std::vector<double> m_rr = second_derivative(grid, prof.m);
        const double s = F1 * std::exp(2.0 * z);
        const double scale = s > 0.0 ? s : 1.0;
        const int n = grid.size();

        Lemma31Entry entry;
        entry.z = z;
        auto add = [&](const std::string& name, auto&& slack_at, double unit_scale) {
            BoundCheck b{name, std::numeric_limits<double>::infinity(), 0, true};
            for (int i = 0; i < n; ++i) {
                const double slack = slack_at(i) / unit_scale;
                if (slack < b.worst_slack) {
                    b.worst_slack = slack;
                    b.worst_node = i;
                }
            }
            b.passed = b.worst_slack >= -relative_tolerance;
            entry.bounds.push_back(b);
        };
        // (1) is dimensionless; the others carry the F(1) e^{2z} scale.
        add("(1a) m > 0", [&](int i) { return prof.m[i]; }, 1.0);
        add("(1b) m <= 1", [&](int i) { return 1.0 - prof.m[i]; }, 1.0);
        add("(2) m_r >= 0", [&](int i) { return prof.m_r[i]; }, scale);
        add("(3) m_z <= 0", [&](int i) { return -prof.m_z[i]; }, scale);
        add("(4) m_r <= r F(1) e^{2z} / 3",
            [&](int i) { return grid.r(i) * s / 3.0 - prof.m_r[i]; }, scale);
        add("(5) m_z >= -(1 - r^2) F(1) e^{2z} / 3",
            [&](int i) {
                const double r = grid.r(i);
                return prof.m_z[i] + (1.0 - r * r) * s / 3.0;
            },
            scale);
        add("(6a) m_rr >= -2 F(1) e^{2z} / 3",
            [&](int i) { return m_rr[i] + 2.0 * s / 3.0; }, scale);
        add("(6b) m_rr <= F(1) e^{2z}", [&](int i) { return s - m_rr[i]; }, scale);
        add("(7) m_z >= -(1 - r^2) F(1) e^{2z} / 3",
            [&](int i) {
                const double r = grid.r(i);
                return prof.m_z[i] + (1.0 - r * r) * s / 3.0;
            },
            scale);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

double flux_identity_residual(const MProfile& profile, const RateModel& model) {
    const Grid& grid = profile.grid;
    const int n = grid.size();
    std::vector<double> Fm(n);
    for (int i = 0; i < n; ++i) Fm[i] = model.value(RateId::F, profile.m[i]);
    const std::vector<double> I = weighted_cumulative_integral(grid, Fm);
    const double e2z = std::exp(2.0 * profile.z);
    double worst = std::abs(profile.m_r[0]);
    for (int i = 1; i < n; ++i) {
        const double r = grid.r(i);
        worst = std::max(worst, std::abs(profile.m_r[i] - e2z * I[i] / (r * r)));
    }
    return worst;
}

} // namespace spheroid
