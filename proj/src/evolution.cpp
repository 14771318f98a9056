#include "spheroid/evolution.hpp"

#include "spheroid/error.hpp"
#include "spheroid/interpolation.hpp"
#include "spheroid/stationary.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spheroid {

namespace {

FieldInterpolant::Kind to_kind(Interpolation interp) {
    return interp == Interpolation::Pchip ? FieldInterpolant::Kind::Pchip
                                          : FieldInterpolant::Kind::Linear;
}

// Semi-Lagrangian update of p along characteristics dr/ds = w(r, s). The foot
// of the characteristic through node r_i is found with Heun's method using
// w_end at the head and w_start at the predicted foot; along it dp/ds = f(c, p)
// is integrated with Heun's method, c_start taken at the foot and c_end at the
// head.
std::vector<double> advect_react(const RateModel& model, const Grid& grid,
                                 const std::vector<double>& p,
                                 const std::vector<double>& c_start,
                                 const std::vector<double>& c_end,
                                 const std::vector<double>& w_start,
                                 const std::vector<double>& w_end, double dt,
                                 Interpolation interp) {
    const int n = grid.size();
    const FieldInterpolant P(grid, p, to_kind(interp));
    const FieldInterpolant C(grid, c_start, to_kind(interp));
    const FieldInterpolant W(grid, w_start, FieldInterpolant::Kind::Linear);

    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double x = grid.r(i);
        const double k1 = w_end[i];
        const double x1 = std::clamp(x - dt * k1, 0.0, 1.0);
        const double k2 = W(x1);
        const double foot = std::clamp(x - 0.5 * dt * (k1 + k2), 0.0, 1.0);
        const bool at_node = foot == x;
        const double pf = at_node ? p[i] : P(foot);
        const double cf = at_node ? c_start[i] : std::clamp(C(foot), 0.0, 1.0);
        const double a = f_reaction(model, cf, pf);
        const double pp = pf + dt * a;
        const double b = f_reaction(model, c_end[i], pp);
        out[i] = pf + 0.5 * dt * (a + b);
    }
    return out;
}

// Rows of the discrete operator
//   L c = c_rr + (2/r + a r v1) c_r,  L -> 3 c_rr at r = 0,
// with a = eps e^{2z}.
struct NutrientCoefficients {
    double e2z;
    double a;   // eps e^{2z}
    double v1;
};

NutrientCoefficients coefficients(double z, double eps, double v1) {
    const double e2z = std::exp(2.0 * z);
    return {e2z, eps * e2z, v1};
}

// G(c) = (L c - e^{2z} F(c)) / a and, when requested, its tridiagonal Jacobian.
// The boundary row is left at zero.
void nutrient_rhs(const RateModel& model, const Grid& grid, const NutrientCoefficients& k,
                  const std::vector<double>& c, std::vector<double>& G,
                  std::vector<double>* lower, std::vector<double>* diag,
                  std::vector<double>* upper) {
    const int n = grid.size();
    const double h = grid.spacing();
    const double ih2 = 1.0 / (h * h);
    G.assign(n, 0.0);
    if (lower) {
        lower->assign(n, 0.0);
        diag->assign(n, 0.0);
        upper->assign(n, 0.0);
    }
    for (int i = 0; i + 1 < n; ++i) {
        const RateValue F = model.eval(RateId::F, c[i]);
        double lo, di, up;
        if (i == 0) {
            lo = 0.0;
            di = -6.0 * ih2;
            up = 6.0 * ih2;
        } else {
            const double r = grid.r(i);
            const double b = 2.0 / r + k.a * r * k.v1;
            lo = ih2 - 0.5 * b / h;
            di = -2.0 * ih2;
            up = ih2 + 0.5 * b / h;
        }
        const double lc = (i > 0 ? lo * c[i - 1] : 0.0) + di * c[i] + up * c[i + 1];
        G[i] = (lc - k.e2z * F.value) / k.a;
        if (lower) {
            (*lower)[i] = lo / k.a;
            (*diag)[i] = (di - k.e2z * F.derivative) / k.a;
            (*upper)[i] = up / k.a;
        }
    }
}

// Solves c - tau G(c) = rhs by Newton's method starting from `guess`.
std::vector<double> implicit_stage(const RateModel& model, const Grid& grid,
                                   const NutrientCoefficients& k, double tau,
                                   const std::vector<double>& rhs, std::vector<double> c) {
    const int n = grid.size();
    std::vector<double> G, lo, di, up;
    double last = 0.0;
    for (int it = 0; it < 30; ++it) {
        nutrient_rhs(model, grid, k, c, G, &lo, &di, &up);
        std::vector<double> res(n);
        for (int i = 0; i + 1 < n; ++i) {
            res[i] = -(c[i] - tau * G[i] - rhs[i]);
            lo[i] = -tau * lo[i];
            di[i] = 1.0 - tau * di[i];
            up[i] = -tau * up[i];
        }
        res[n - 1] = 1.0 - c[n - 1];
        lo[n - 1] = 0.0;
        di[n - 1] = 1.0;
        solve_tridiagonal(lo, di, up, res);
        for (int i = 0; i < n; ++i) c[i] += res[i];
        last = max_abs(res);
        if (last <= 1e-12) break;
        if (it == 29) throw ConvergenceError("nutrient implicit stage did not converge", last);
    }
    c[n - 1] = 1.0;
    return c;
}

// One TR-BDF2 step of a(t) c_t = L(t) c - e^{2z(t)} F(c) over [t, t + dt]
// with z and v1 varying linearly across the step.
std::vector<double> nutrient_trbdf2(const RateModel& model, const Grid& grid,
                                    const std::vector<double>& c0, double dt, double eps,
                                    double z0, double z1, double v10, double v11) {
    const double gamma = 2.0 - std::sqrt(2.0);
    const int n = grid.size();
    const NutrientCoefficients k0 = coefficients(z0, eps, v10);
    const NutrientCoefficients kg =
        coefficients(z0 + gamma * (z1 - z0), eps, v10 + gamma * (v11 - v10));
    const NutrientCoefficients k1 = coefficients(z1, eps, v11);

    std::vector<double> G0;
    nutrient_rhs(model, grid, k0, c0, G0, nullptr, nullptr, nullptr);
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = c0[i] + 0.5 * gamma * dt * G0[i];
    const std::vector<double> cg = implicit_stage(model, grid, kg, 0.5 * gamma * dt, rhs, c0);

    const double w1 = 1.0 / (gamma * (2.0 - gamma));
    const double w0 = (1.0 - gamma) * (1.0 - gamma) / (gamma * (2.0 - gamma));
    for (int i = 0; i < n; ++i) rhs[i] = w1 * cg[i] - w0 * c0[i];
    return implicit_stage(model, grid, k1, (1.0 - gamma) / (2.0 - gamma) * dt, rhs, cg);
}

void check_finite(const std::vector<double>& u, const char* what) {
    for (double x : u)
        if (!std::isfinite(x)) throw NumericError(std::string("non-finite value in ") + what);
}

void clip_field(std::vector<double>& u, char field, double t, std::vector<ClipEvent>* clips) {
    for (int i = 0; i < static_cast<int>(u.size()); ++i) {
        if (u[i] < 0.0 || u[i] > 1.0) {
            if (clips) clips->push_back({t, field, i, u[i]});
            u[i] = std::clamp(u[i], 0.0, 1.0);
        }
    }
}

} // namespace

std::string_view interpolation_name(Interpolation kind) {
    return kind == Interpolation::Pchip ? "pchip" : "linear";
}

Interpolation interpolation_from_name(std::string_view name) {
    if (name == "pchip") return Interpolation::Pchip;
    if (name == "linear") return Interpolation::Linear;
    throw DomainError("unknown interpolation '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
    if (!(eps >= 0.0)) throw DomainError("solver eps must be >= 0");
    if (!(dt > 0.0)) throw DomainError("solver dt must be > 0");
    if (!(t_end >= 0.0)) throw DomainError("solver t_end must be >= 0");
    if (splitting_order != 1 && splitting_order != 2)
        throw DomainError("splitting order must be 1 or 2");
    if (output_every < 1) throw DomainError("output_every must be >= 1");
    if (snapshot_every < 0) throw DomainError("snapshot_every must be >= 0");
}

std::size_t ClipLog::beyond(double tol) const {
    return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [&](const ClipEvent& e) {
        return e.value < -tol || e.value > 1.0 + tol;
    }));
}

VelocityField velocity_from_state(const RateModel& model, const State& state) {
    const Grid& grid = state.grid;
    const int n = grid.size();
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = g_source(model, state.c[i], state.p[i]);
    const std::vector<double> I = weighted_cumulative_integral(grid, g);

    VelocityField vel;
    vel.v.assign(n, 0.0);
    vel.w.assign(n, 0.0);
    for (int i = 1; i < n; ++i) {
        const double r = grid.r(i);
        vel.v[i] = I[i] / (r * r);
    }
    vel.v1 = vel.v[n - 1];
    for (int i = 1; i + 1 < n; ++i) vel.w[i] = vel.v[i] - grid.r(i) * vel.v1;
    return vel;
}

std::vector<double> nutrient_step(const RateModel& model, const State& state,
                                  const VelocityField& vel, double dt, double eps) {
    if (!(eps > 0.0)) throw DomainError("nutrient_step requires eps > 0");
    const Grid& grid = state.grid;
    const int n = grid.size();
    const NutrientCoefficients k = coefficients(state.z, eps, vel.v1);

    // Linearizing F about the old iterate makes one Newton step of the backward
    // Euler stage exact: c_new - dt G_lin(c_new) = c_old.
    std::vector<double> G, lo, di, up;
    nutrient_rhs(model, grid, k, state.c, G, &lo, &di, &up);
    std::vector<double> rhs(n);
    for (int i = 0; i + 1 < n; ++i) {
        // G(c_old) + J (c_new - c_old) is the linearized operator.
        rhs[i] = dt * G[i];
        lo[i] = -dt * lo[i];
        di[i] = 1.0 - dt * di[i];
        up[i] = -dt * up[i];
    }
    rhs[n - 1] = 1.0 - state.c[n - 1];
    lo[n - 1] = 0.0;
    di[n - 1] = 1.0;
    up[n - 1] = 0.0;
    solve_tridiagonal(lo, di, up, rhs);
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i) c[i] = state.c[i] + rhs[i];
    c[n - 1] = 1.0;
    check_finite(c, "nutrient step");
    return c;
}

std::vector<double> quasi_static_update(const RateModel& model, const State& state,
                                        double newton_tol) {
    return solve_m_values(model, state.z, state.grid, NewtonOptions{newton_tol, 50});
}

std::vector<double> transport_step(const RateModel& model, const State& state,
                                   const VelocityField& vel, double dt, Interpolation interpolation) {
    return advect_react(model, state.grid, state.p, state.c, state.c, vel.w, vel.w, dt,
                        interpolation);
}

double boundary_radius_step(double z, double t, double dt,
                            const std::function<double(double, double)>& v1) {
    const double k1 = v1(t, z);
    const double k2 = v1(t + dt, z + dt * k1);
    return z + 0.5 * dt * (k1 + k2);
}

State step(const RateModel& model, const State& state, const SolverConfig& config,
           StepDiagnostics* diagnostics) {
    const Grid& grid = state.grid;
    const double dt = config.dt;
    const double eps = config.eps;
    const bool quasi_static = eps == 0.0;
    const NewtonOptions newton{config.newton_tol, 50};

    const VelocityField vel0 = velocity_from_state(model, state);

    State next;
    next.grid = grid;
    next.t = state.t + dt;

    if (config.splitting_order == 1) {
        next.p = transport_step(model, state, vel0, dt, config.interpolation);
        next.z = boundary_radius_step(state.z, state.t, dt, [&](double t, double z) {
            if (t == state.t) return vel0.v1;
            State pred{t, z, grid,
                       quasi_static ? solve_m_values(model, z, grid, newton) : state.c, next.p};
            return velocity_from_state(model, pred).v1;
        });
        next.c = quasi_static ? solve_m_values(model, next.z, grid, newton)
                              : nutrient_step(model, state, vel0, dt, eps);
    } else {
        // Predictor: first-order step with the start velocity.
        State pred;
        VelocityField vel1;
        next.z = boundary_radius_step(state.z, state.t, dt, [&](double t, double z) {
            if (t == state.t) return vel0.v1;
            pred.t = t;
            pred.z = z;
            pred.grid = grid;
            pred.p = advect_react(model, grid, state.p, state.c, state.c, vel0.w, vel0.w, dt,
                                  config.interpolation);
            if (quasi_static) {
                pred.c = solve_m_values(model, z, grid, newton);
            } else {
                // Backward Euler with the coefficients at the predicted radius, so
                // that c tracks m(.; z(t + dt)) when the nutrient is stiff.
                State base = state;
                base.z = z;
                pred.c = nutrient_step(model, base, vel0, dt, eps);
            }
            vel1 = velocity_from_state(model, pred);
            return vel1.v1;
        });
        // Corrector with the velocity varying over the step.
        next.p = advect_react(model, grid, state.p, state.c, pred.c, vel0.w, vel1.w, dt,
                              config.interpolation);
        next.c = quasi_static ? solve_m_values(model, next.z, grid, newton)
                              : nutrient_trbdf2(model, grid, state.c, dt, eps, state.z, next.z,
                                                vel0.v1, vel1.v1);
    }

    check_finite(next.p, "proliferating fraction");
    check_finite(next.c, "nutrient");
    if (!std::isfinite(next.z)) throw NumericError("non-finite log-radius");

    std::vector<ClipEvent>* clips = diagnostics ? &diagnostics->clips : nullptr;
    clip_field(next.c, 'c', next.t, clips);
    clip_field(next.p, 'p', next.t, clips);
    next.c[grid.size() - 1] = 1.0;
    if (diagnostics) diagnostics->v1 = vel0.v1;
    return next;
}

namespace {

std::vector<std::string> admissibility_warnings(const State& s, bool strict_p) {
    std::vector<std::string> out;
    const int n = s.grid.size();
    const double tol = 1e-10;
    if (std::abs(s.c[n - 1] - 1.0) > tol) out.push_back("initial c(1) != 1");
    for (int i = 0; i < n; ++i) {
        if (s.c[i] < -tol || s.c[i] > 1.0 + tol) {
            out.push_back("initial c outside [0,1]");
            break;
        }
    }
    for (int i = 0; i < n; ++i) {
        if (s.p[i] < -tol || s.p[i] > 1.0 + tol) {
            out.push_back("initial p outside [0,1]");
            break;
        }
    }
    if (strict_p && std::abs(s.p[n - 1] - 1.0) > tol) out.push_back("initial p(1) != 1");
    return out;
}

bool below_floor(const DeviationRecord& d, double floor) {
    for (double v : decay_norms(d))
        if (!(v < floor)) return false;
    return true;
}

} // namespace

SimulationResult simulate(const RateModel& model, const State& init, const SolverConfig& config,
                          const StationarySolution& stationary, const SimulationHooks& hooks,
                          const std::optional<State>& previous) {
    config.validate();
    if (!(init.grid == config.grid) || !(stationary.grid == config.grid))
        throw DomainError("initial state, stationary solution and solver grid differ");
    if (static_cast<int>(init.c.size()) != config.grid.size() ||
        static_cast<int>(init.p.size()) != config.grid.size())
        throw DomainError("initial state arrays do not match the grid");

    SimulationResult result;
    result.warnings = admissibility_warnings(init, config.strict_boundary_p);
    result.admissible = result.warnings.empty();
    for (const auto& w : result.warnings) spdlog::warn("admissibility: {}", w);

    const NewtonOptions newton{config.newton_tol, 50};
    State current = init;
    // In the quasi-static mode c is slaved to z; a perturbed initial c would
    // only enter the first step's velocity as an O(dt) error.
    if (config.eps == 0.0) {
        std::vector<double> m0 = solve_m_values(model, init.z, init.grid, newton);
        if (m0 != init.c) {
            spdlog::debug("quasi-static run: initial c replaced by m(.; z0), max change {:.3g}",
                          max_abs_diff(m0, init.c));
            current.c = std::move(m0);
        }
    }
    const long k_begin = std::lround(init.t / config.dt);
    const long k_end = std::max(k_begin, std::lround(config.t_end / config.dt));

    std::optional<State> last_record_state = previous;

    auto emit = [&](const State& s, double v1) {
        const MProfile m = solve_m(model, s.z, s.grid, newton);
        TimeRecord rec{s.t, s.radius(), s.z, v1,
                       deviation_norms(s, last_record_state ? &*last_record_state : nullptr,
                                       stationary, m)};
        result.series.push_back(rec);
        if (hooks.on_record) hooks.on_record(rec, s);
        last_record_state = s;
        return rec;
    };

    if (!previous) emit(current, velocity_from_state(model, current).v1);

    const long snapshot_stride =
        config.snapshot_every > 0 ? static_cast<long>(config.output_every) * config.snapshot_every
                                  : 0;
    for (long k = k_begin + 1; k <= k_end; ++k) {
        StepDiagnostics diag;
        State next;
        try {
            next = step(model, current, config, &diag);
        } catch (const NumericError&) {
            if (hooks.on_snapshot) hooks.on_snapshot(current);
            throw;
        }
        next.t = static_cast<double>(k) * config.dt;
        for (const ClipEvent& e : diag.clips) {
            const double violation = e.value < 0.0 ? -e.value : e.value - 1.0;
            result.clips.max_violation = std::max(result.clips.max_violation, violation);
            if (violation > config.clip_tol)
                spdlog::warn("clipped {}[{}] = {:.17g} at t = {}", e.field, e.node, e.value, e.t);
            result.clips.events.push_back(e);
        }
        current = std::move(next);

        if (k % config.output_every == 0 || k == k_end) {
            const TimeRecord rec = emit(current, velocity_from_state(model, current).v1);
            if (snapshot_stride > 0 && k % snapshot_stride == 0 && hooks.on_snapshot)
                hooks.on_snapshot(current);
            if (config.early_stop_floor > 0.0 && below_floor(rec.deviation, config.early_stop_floor)) {
                result.early_stopped = true;
                break;
            }
        }
    }
    if (hooks.on_snapshot) hooks.on_snapshot(current);
    result.final_state = std::move(current);
    return result;
}

} // namespace spheroid
