#include "spheroid/stationary.hpp"

#include "spheroid/error.hpp"
#include "spheroid/nutrient_profile.hpp"

#include <boost/numeric/odeint.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace spheroid {

double StationarySolution::method_gap() const { return std::abs(z - z_direct); }

State StationarySolution::as_state() const { return State{0.0, z, grid, c, p}; }

namespace {

// Cubic Hermite interpolant of m from nodal values and slopes.
class HermiteProfile {
public:
    explicit HermiteProfile(const MProfile& prof) : prof_(prof), h_(prof.grid.spacing()) {}

    double operator()(double r) const {
        const int n = prof_.grid.size();
        const double s = std::clamp(r / h_, 0.0, static_cast<double>(n - 1));
        const int i = std::min(static_cast<int>(s), n - 2);
        const double t = s - i;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * prof_.m[i] + h10 * h_ * prof_.m_r[i] + h01 * prof_.m[i + 1] +
               h11 * h_ * prof_.m_r[i + 1];
    }

private:
    const MProfile& prof_;
    double h_;
};

using ShootState = std::array<double, 2>;  // (V, p), V = r^2 v

constexpr double kShootStart = 1e-6;  // distance from r = 1 where the series start is used

} // namespace

ShootingResult shoot_stationary(const RateModel& model, double z, const Grid& grid) {
    namespace odeint = boost::numeric::odeint;
    const int n = grid.size();
    const MProfile prof = solve_m(model, z, grid);
    const HermiteProfile C(prof);

    ShootingResult out;
    out.z = z;

    // Boundary behaviour: p(1) is the rest point of p' = f(1, p) and V ~ -g1 (1 - r).
    const double p1 = equilibrium_fraction(model, 1.0);
    const SourcePartials g1 = g_partials(model, 1.0, p1);
    if (!(g1.g > 0.0))
        throw DomainError("shooting requires g(1, p(1)) > 0 (inward stationary flow)");
    const ReactionPartials f1 = f_partials(model, 1.0, p1);
    const double cr1 = prof.m_r[n - 1];
    const double a = f1.f_c * cr1 / (g1.g - f1.f_p);  // p ~ p1 - a s
    const double g1r = g1.g_c * cr1 + g1.g_p * a;      // dg/dr at r = 1
    const double s0 = kShootStart;
    // V(1 - s) = -g1 s + (g1' + 2 g1) s^2 / 2 + O(s^3)
    ShootState x{-g1.g * s0 + 0.5 * (g1r + 2.0 * g1.g) * s0 * s0, p1 - a * s0};

    auto rhs = [&](const ShootState& u, ShootState& du, double r) {
        const double c = std::clamp(C(r), 0.0, 1.0);
        const double p = std::clamp(u[1], 0.0, 1.0);
        du[0] = g_source(model, c, p) * r * r;
        du[1] = u[0] < 0.0 ? f_reaction(model, c, p) * r * r / u[0] : 0.0;
    };

    out.p.assign(n, 0.0);
    out.p[n - 1] = p1;

    auto stepper = odeint::make_dense_output(1e-13, 1e-11, odeint::runge_kutta_dopri5<ShootState>());
    const double r_min = grid.r(1);
    double r = 1.0 - s0;
    stepper.initialize(x, r, -1e-4);
    int next = n - 2;
    constexpr int kMaxSteps = 200000;
    for (int it = 0; it < kMaxSteps && next >= 1; ++it) {
        stepper.do_step(rhs);
        const ShootState& cur = stepper.current_state();
        const double r_new = stepper.current_time();
        if (!(cur[0] < -1e-300) || !std::isfinite(cur[1])) {
            // V returned to zero before the origin.
            out.crossed = true;
            out.mismatch = std::numeric_limits<double>::infinity();
            out.p.clear();
            return out;
        }
        while (next >= 1 && grid.r(next) >= r_new) {
            ShootState xi;
            stepper.calc_state(grid.r(next), xi);
            out.p[next] = std::clamp(xi[1], 0.0, 1.0);
            if (next == 1) {
                const double c = prof.m[1];
                out.mismatch = xi[0] - g_source(model, c, out.p[1]) * r_min * r_min * r_min / 3.0;
            }
            --next;
        }
        if (stepper.current_time_step() > -1e-15 && next >= 1)
            throw ConvergenceError("shooting step size underflow", std::abs(cur[0]));
        r = r_new;
    }
    if (next >= 1) throw ConvergenceError("shooting did not reach the origin", 0.0);
    out.p[0] = equilibrium_fraction(model, prof.m[0]);
    return out;
}

ShootingResult solve_stationary_direct(const RateModel& model, const Grid& grid,
                                       const StationaryOptions& options) {
    auto sign = [](const ShootingResult& s) { return s.crossed || s.mismatch > 0.0 ? 1 : -1; };
    double lo = options.z_lo, hi = options.z_hi;
    ShootingResult a = shoot_stationary(model, lo, grid);
    ShootingResult b = shoot_stationary(model, hi, grid);
    const int sa = sign(a);
    if (sa == sign(b))
        throw ConvergenceError("stationary radius not bracketed by [" + std::to_string(lo) + ", " +
                                   std::to_string(hi) + "]",
                               a.mismatch);
    ShootingResult best = std::abs(a.mismatch) < std::abs(b.mismatch) ? a : b;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        ShootingResult m = shoot_stationary(model, mid, grid);
        if (sign(m) == sa)
            lo = mid;
        else
            hi = mid;
        if (!m.crossed) best = std::move(m);
    }
    // The last non-crossed trial lies within the final bracket width of z*.
    best.z = 0.5 * (lo + hi);
    return best;
}

void compute_stationary_residuals(const RateModel& model, StationarySolution& sol,
                                  double newton_tol) {
    const Grid& grid = sol.grid;
    const int n = grid.size();
    const State s = sol.as_state();
    const VelocityField vel = velocity_from_state(model, s);
    sol.v = vel.v;
    sol.v1_residual = std::abs(vel.v1);
    const std::vector<double> pr = derivative(grid, sol.p, OriginDerivative::OneSided);
    sol.transport_residual = 0.0;
    for (int i = 1; i + 1 < n; ++i)
        sol.transport_residual = std::max(
            sol.transport_residual, std::abs(-vel.v[i] * pr[i] + f_reaction(model, sol.c[i], sol.p[i])));
    sol.c_mismatch =
        max_abs_diff(sol.c, solve_m_values(model, sol.z, grid, NewtonOptions{newton_tol, 50}));
}

StationarySolution solve_stationary(const RateModel& model, const Grid& grid,
                                    const StationaryOptions& options) {
    SolverConfig cfg;
    cfg.eps = 0.0;
    cfg.dt = options.dt;
    cfg.grid = grid;
    cfg.splitting_order = options.splitting_order;
    cfg.interpolation = options.interpolation;
    cfg.newton_tol = options.newton_tol;
    cfg.validate();
    if (!(options.tol > 0.0)) throw DomainError("stationary tol must be > 0");

    const NewtonOptions newton{options.newton_tol, 50};
    State s;
    s.grid = grid;
    s.z = options.z_init;
    s.c = solve_m_values(model, s.z, grid, newton);
    s.p.resize(grid.size());
    for (int i = 0; i < grid.size(); ++i) s.p[i] = equilibrium_fraction(model, s.c[i]);

    const long max_steps = std::lround(options.t_max / options.dt);
    int quiet = 0;
    long k = 0;
    double incr = std::numeric_limits<double>::infinity();
    for (; k < max_steps && quiet < options.consecutive; ++k) {
        State next = step(model, s, cfg);
        incr = std::max({std::abs(next.z - s.z), max_abs_diff(next.c, s.c),
                         max_abs_diff(next.p, s.p)}) /
               options.dt;
        quiet = incr < options.tol ? quiet + 1 : 0;
        s = std::move(next);
    }
    if (quiet < options.consecutive)
        throw ConvergenceError("stationary relaxation did not settle by t = " +
                                   std::to_string(options.t_max),
                               incr);

    StationarySolution sol;
    sol.z = s.z;
    sol.grid = grid;
    sol.c = std::move(s.c);
    sol.p = std::move(s.p);
    sol.relaxation_steps = k;
    sol.relaxation_time = static_cast<double>(k) * options.dt;
    compute_stationary_residuals(model, sol, options.newton_tol);

    sol.z_direct = solve_stationary_direct(model, grid, options).z;
    if (sol.method_gap() > options.agreement_tol)
        spdlog::warn("relaxation z* = {:.12g} and shooting z* = {:.12g} differ by {:.3g}", sol.z,
                     sol.z_direct, sol.method_gap());
    spdlog::info("stationary z* = {:.12g} after {} relaxation steps, |v(1)| = {:.3g}", sol.z,
                 sol.relaxation_steps, sol.v1_residual);
    return sol;
}

} // namespace spheroid
