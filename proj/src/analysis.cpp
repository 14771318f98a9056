#include "spheroid/analysis.hpp"

#include "spheroid/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>
#include <tuple>

namespace spheroid {

namespace {

struct Perturbation {
    std::vector<double> phi_c;
    std::vector<double> psi_p;
    double xi;
};

constexpr int kRandomModes = 4;

Perturbation make_perturbation(const Grid& grid, Shape shape, std::uint64_t seed) {
    const int n = grid.size();
    Perturbation out{std::vector<double>(n), std::vector<double>(n), 0.0};
    const double pi = std::numbers::pi;
    switch (shape) {
    case Shape::Polynomial:
        for (int i = 0; i < n; ++i) {
            const double r = grid.r(i);
            out.phi_c[i] = 0.5 * (1.0 - r * r);
            out.psi_p[i] = -out.phi_c[i];
        }
        out.xi = 1.0;
        break;
    case Shape::Cosine:
        for (int i = 0; i < n; ++i) {
            out.phi_c[i] = 0.5 * std::cos(0.5 * pi * grid.r(i));
            out.psi_p[i] = -out.phi_c[i];
        }
        out.xi = -1.0;
        break;
    case Shape::Random: {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::array<double, kRandomModes> a{}, b{};
        for (int k = 0; k < kRandomModes; ++k) a[k] = u(rng) / ((k + 1.0) * (k + 1.0));
        for (int k = 0; k < kRandomModes; ++k) b[k] = u(rng) / ((k + 1.0) * (k + 1.0));
        out.xi = u(rng);
        double sa = 0.0, sb = 0.0;
        for (int k = 0; k < kRandomModes; ++k) {
            sa += std::abs(a[k]);
            sb += std::abs(b[k]);
        }
        for (int i = 0; i < n; ++i) {
            const double r = grid.r(i);
            double fc = 0.0, fp = 0.0;
            for (int k = 0; k < kRandomModes; ++k) {
                const double mode = std::cos((k + 0.5) * pi * r);
                fc += a[k] * mode;
                fp += b[k] * mode;
            }
            out.phi_c[i] = sa > 0.0 ? 0.5 * fc / sa : 0.0;
            out.psi_p[i] = sb > 0.0 ? 0.5 * fp / sb : 0.0;
        }
        break;
    }
    }
    // cos((k - 1/2) pi) is not exactly zero in floating point.
    out.phi_c[n - 1] = 0.0;
    out.psi_p[n - 1] = 0.0;
    return out;
}

} // namespace

std::string_view shape_name(Shape shape) {
    switch (shape) {
    case Shape::Polynomial: return "polynomial";
    case Shape::Cosine: return "cosine";
    case Shape::Random: return "random";
    }
    return "?";
}

Shape shape_from_name(std::string_view name) {
    if (name == "polynomial") return Shape::Polynomial;
    if (name == "cosine") return Shape::Cosine;
    if (name == "random") return Shape::Random;
    throw DomainError("unknown perturbation shape '" + std::string(name) + "'");
}

bool AdmissibleInit::all_passed() const {
    return std::all_of(conditions.begin(), conditions.end(),
                       [](const InitCondition& c) { return c.passed; });
}

State perturbed_state(const State& base, double delta, Shape shape, std::uint64_t seed,
                      int* clamped_nodes) {
    if (!(delta >= 0.0)) throw DomainError("perturbation amplitude must be >= 0");
    const Grid& grid = base.grid;
    const int n = grid.size();
    const Perturbation pert = make_perturbation(grid, shape, seed);
    State s = base;
    s.t = 0.0;
    int clamped = 0;
    for (int i = 0; i < n; ++i) {
        const double c = base.c[i] + delta * pert.phi_c[i];
        const double p = base.p[i] + delta * pert.psi_p[i];
        s.c[i] = std::clamp(c, 0.0, 1.0);
        s.p[i] = std::clamp(p, 0.0, 1.0);
        if (s.c[i] != c || s.p[i] != p) ++clamped;
    }
    s.z = base.z + delta * pert.xi;
    if (clamped_nodes) *clamped_nodes = clamped;
    return s;
}

AdmissibleInit admissible_init(const StationarySolution& stationary, double delta, Shape shape,
                               std::uint64_t seed, bool strict_boundary_p) {
    AdmissibleInit out;
    out.state = perturbed_state(stationary.as_state(), delta, shape, seed, &out.clamped_nodes);
    const State& s = out.state;
    const int n = s.grid.size();
    const double h = s.grid.spacing();

    if (out.clamped_nodes * 100 > n) {
        out.warnings.push_back("clamping altered " + std::to_string(out.clamped_nodes) + " of " +
                               std::to_string(n) + " nodes");
        spdlog::warn("admissible_init: {}", out.warnings.back());
    }

    double range = 0.0;
    for (int i = 0; i < n; ++i) {
        range = std::max({range, -s.c[i], s.c[i] - 1.0, -s.p[i], s.p[i] - 1.0});
    }
    // One-sided slope at the origin; the perturbations and c* are even in r,
    // so this is O(h^2) for admissible data.
    const double slope0 = std::abs(-3.0 * s.c[0] + 4.0 * s.c[1] - s.c[2]) / (2.0 * h);
    const double slope_ref = std::abs(-3.0 * stationary.c[0] + 4.0 * stationary.c[1] -
                                      stationary.c[2]) / (2.0 * h);
    const double slope_defect = std::max(0.0, slope0 - slope_ref - delta * 2.0 * h);
    out.conditions.push_back({"c0, p0 in [0,1]", std::max(0.0, range), range <= 0.0});
    out.conditions.push_back({"c0'(0) = 0", slope_defect, slope_defect <= 1e-12});
    const double bc = std::abs(s.c[n - 1] - 1.0);
    out.conditions.push_back({"c0(1) = 1", bc, bc == 0.0});
    if (strict_boundary_p) {
        const double pb = std::abs(s.p[n - 1] - 1.0);
        out.conditions.push_back({"p0(1) = 1", pb, pb <= 1e-10});
    }
    out.conditions.push_back({"z0 finite", 0.0, std::isfinite(s.z)});
    for (const auto& c : out.conditions)
        if (!c.passed) out.warnings.push_back("initial condition " + c.name + " violated by " +
                                              std::to_string(c.defect));
    return out;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y,
                   const DecayFitOptions& options) {
    if (t.size() != y.size()) throw DomainError("fit_decay: t and y differ in length");
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (std::isfinite(y[i]) && std::isfinite(t[i]) && y[i] > 0.0 && y[i] > options.floor)
            usable.push_back(i);
    const int min_points = std::max(2, options.min_points);
    if (static_cast<int>(usable.size()) < min_points)
        throw InsufficientDataError("fit_decay: " + std::to_string(usable.size()) +
                                    " usable points, need " + std::to_string(min_points));
    const auto n_tail = std::max<std::size_t>(
        min_points, static_cast<std::size_t>(std::ceil(options.tail_fraction * usable.size())));
    const std::size_t first = usable.size() - std::min(n_tail, usable.size());

    double st = 0.0, sy = 0.0;
    const std::size_t m = usable.size() - first;
    for (std::size_t k = first; k < usable.size(); ++k) {
        st += t[usable[k]];
        sy += std::log(y[usable[k]]);
    }
    const double tm = st / m, ym = sy / m;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t k = first; k < usable.size(); ++k) {
        const double dt = t[usable[k]] - tm;
        const double dy = std::log(y[usable[k]]) - ym;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if (!(stt > 0.0)) throw InsufficientDataError("fit_decay: window has no time extent");
    const double slope = sty / stt;
    const double intercept = ym - slope * tm;
    double ss_res = 0.0;
    for (std::size_t k = first; k < usable.size(); ++k) {
        const double e = std::log(y[usable[k]]) - (intercept + slope * t[usable[k]]);
        ss_res += e * e;
    }

    DecayFit fit;
    fit.mu = -slope;
    fit.C = std::exp(intercept);
    fit.t1 = t[usable[first]];
    fit.t2 = t[usable.back()];
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.points = static_cast<int>(m);
    return fit;
}

bool StabilityCell::decay_observed() const {
    if (delta == 0.0) return status == "skipped";
    if (!converged) return false;
    return std::all_of(fits.begin(), fits.end(),
                       [](const std::optional<DecayFit>& f) { return f && f->mu > 0.0; });
}

bool StabilityReport::all_decayed() const {
    return std::all_of(cells.begin(), cells.end(),
                       [](const StabilityCell& c) { return c.decay_observed(); });
}

double StabilityReport::max_mu_spread() const {
    using Key = std::tuple<double, int, std::uint64_t>;
    std::map<Key, std::vector<const StabilityCell*>> groups;
    for (const auto& c : cells)
        if (c.delta > 0.0) groups[{c.eps, static_cast<int>(c.shape), c.seed}].push_back(&c);
    double spread = 0.0;
    for (const auto& [key, group] : groups) {
        for (std::size_t j = 0; j < kDecayNormCount; ++j) {
            double lo = INFINITY, hi = -INFINITY;
            bool complete = true;
            for (const StabilityCell* c : group) {
                if (!c->fits[j]) {
                    complete = false;
                    break;
                }
                lo = std::min(lo, c->fits[j]->mu);
                hi = std::max(hi, c->fits[j]->mu);
            }
            if (!complete) return INFINITY;
            if (group.size() > 1 && hi > 0.0) spread = std::max(spread, (hi - lo) / hi);
        }
    }
    return spread;
}

namespace {

StabilityCell run_cell(const RateModel& model, const SolverConfig& base,
                       const StationarySolution& stationary, const ExperimentConfig& experiment,
                       double eps, double delta, Shape shape, std::uint64_t seed) {
    StabilityCell cell;
    cell.eps = eps;
    cell.delta = delta;
    cell.shape = shape;
    cell.seed = seed;
    try {
        SolverConfig cfg = base;
        cfg.eps = eps;
        cfg.early_stop_floor = experiment.early_stop_floor;
        const AdmissibleInit init = admissible_init(stationary, delta, shape, seed,
                                                    cfg.strict_boundary_p);
        SimulationResult run = simulate(model, init.state, cfg, stationary);
        cell.series = std::move(run.series);

        const double target = delta / 10.0;
        auto below = [&](const TimeRecord& rec) {
            for (double v : decay_norms(rec.deviation))
                if (!(v < target)) return false;
            return true;
        };
        if (delta == 0.0) {
            cell.converged = true;
            cell.crossing_time = 0.0;
            cell.status = "skipped";
            return cell;
        }
        // The first record has no time differences, so it cannot count as a crossing.
        for (std::size_t i = 1; i < cell.series.size(); ++i) {
            if (below(cell.series[i])) {
                cell.crossing_time = cell.series[i].t;
                break;
            }
        }
        cell.converged = cell.crossing_time >= 0.0 && below(cell.series.back());

        std::vector<double> t;
        for (std::size_t i = 1; i < cell.series.size(); ++i) t.push_back(cell.series[i].t);
        for (std::size_t j = 0; j < kDecayNormCount; ++j) {
            std::vector<double> y;
            for (std::size_t i = 1; i < cell.series.size(); ++i)
                y.push_back(decay_norms(cell.series[i].deviation)[j]);
            try {
                cell.fits[j] = fit_decay(t, y, experiment.fit);
            } catch (const InsufficientDataError& e) {
                spdlog::warn("eps={} delta={} shape={}: {} fit skipped ({})", eps, delta,
                             shape_name(shape), kDecayNormNames[j], e.what());
            }
        }
        cell.status = cell.decay_observed() ? "ok" : "no-decay";
    } catch (const std::exception& e) {
        cell.status = std::string("failed: ") + e.what();
        spdlog::error("stability cell eps={} delta={} shape={} seed={} failed: {}", eps, delta,
                      shape_name(shape), seed, e.what());
    }
    return cell;
}

} // namespace

StabilityReport stability_experiment(const RateModel& model, const SolverConfig& base,
                                     const StationarySolution& stationary,
                                     const ExperimentConfig& experiment,
                                     const std::function<void(const StabilityCell&)>& on_cell) {
    base.validate();
    struct Key {
        double eps, delta;
        Shape shape;
        std::uint64_t seed;
    };
    std::vector<Key> keys;
    for (double eps : experiment.eps_list)
        for (double delta : experiment.delta_list)
            for (Shape shape : experiment.shapes)
                for (std::uint64_t seed : experiment.seeds) keys.push_back({eps, delta, shape, seed});
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        return std::tie(a.eps, a.delta, a.shape, a.seed) < std::tie(b.eps, b.delta, b.shape, b.seed);
    });

    unsigned threads = experiment.max_threads > 0 ? static_cast<unsigned>(experiment.max_threads)
                                                  : std::max(1u, std::thread::hardware_concurrency());
    StabilityReport report;
    report.cells.resize(keys.size());
    std::mutex callback_mutex;
    // Cells are launched in batches of `threads`; each writes only its own slot.
    for (std::size_t start = 0; start < keys.size(); start += threads) {
        const std::size_t end = std::min(keys.size(), start + threads);
        std::vector<std::future<void>> jobs;
        for (std::size_t i = start; i < end; ++i) {
            jobs.push_back(std::async(std::launch::async, [&, i] {
                const Key& k = keys[i];
                report.cells[i] = run_cell(model, base, stationary, experiment, k.eps, k.delta,
                                           k.shape, k.seed);
                if (on_cell) {
                    std::lock_guard lock(callback_mutex);
                    on_cell(report.cells[i]);
                }
            }));
        }
        for (auto& j : jobs) j.get();
    }

    std::map<double, bool> decayed_by_eps;
    for (const auto& c : report.cells) {
        auto [it, inserted] = decayed_by_eps.emplace(c.eps, true);
        it->second = it->second && c.decay_observed();
    }
    for (const auto& [eps, ok] : decayed_by_eps) {
        if (!ok) break;
        report.eps0_proxy = eps;
    }
    return report;
}

std::string_view convergence_kind_name(ConvergenceKind kind) {
    switch (kind) {
    case ConvergenceKind::Diffusion: return "diffusion";
    case ConvergenceKind::Transport: return "transport";
    case ConvergenceKind::Time: return "time";
    }
    return "?";
}

ConvergenceKind convergence_kind_from_name(std::string_view name) {
    if (name == "diffusion") return ConvergenceKind::Diffusion;
    if (name == "transport") return ConvergenceKind::Transport;
    if (name == "time") return ConvergenceKind::Time;
    throw DomainError("unknown convergence study '" + std::string(name) + "'");
}

double FieldOrders::finest_order() const { return orders.empty() ? NAN : orders.back(); }

const FieldOrders& ConvergenceResult::field(std::string_view name) const {
    for (const auto& f : fields)
        if (f.field == name) return f;
    throw DomainError("no field '" + std::string(name) + "' in convergence result");
}

namespace {

// Reference log-radius of the convergence runs: close to the default model's
// stationary radius, but not a rest point, so every field moves.
constexpr double kConvergenceZ0 = 1.2;

// With `well_prepared` the nutrient starts on m(.; z0), so no initial layer of
// width eps e^{2z} has to be resolved by the time step.
State convergence_init(const RateModel& model, const Grid& grid, double delta, double newton_tol,
                       bool well_prepared) {
    const NewtonOptions newton{newton_tol, 50};
    State s;
    s.grid = grid;
    s.z = kConvergenceZ0;
    s.c = solve_m_values(model, s.z, grid, newton);
    s.p.resize(grid.size());
    for (int i = 0; i < grid.size(); ++i) s.p[i] = equilibrium_fraction(model, s.c[i]);
    s = perturbed_state(s, delta, Shape::Polynomial, 0);
    if (well_prepared) s.c = solve_m_values(model, s.z, grid, newton);
    return s;
}

} // namespace

ConvergenceResult self_convergence(const RateModel& model, const SolverConfig& base,
                                   const ConvergenceSpec& spec) {
    if (spec.levels < 3) throw DomainError("self_convergence needs at least 3 levels");
    ConvergenceResult result;
    result.kind = spec.kind;

    RateModel run_model = model;
    SolverConfig cfg = base;
    cfg.t_end = spec.t_end;
    cfg.output_every = 1 << 30;
    cfg.snapshot_every = 0;
    cfg.early_stop_floor = 0.0;
    if (spec.kind == ConvergenceKind::Diffusion) {
        run_model = RateModel::zero_model().with_rate(RateId::F, model.rate(RateId::F));
        if (cfg.eps == 0.0) cfg.eps = 0.1;
    }

    std::vector<State> finals;
    for (int k = 0; k < spec.levels; ++k) {
        SolverConfig level = cfg;
        if (spec.kind == ConvergenceKind::Time) {
            level.dt = spec.dt0 / static_cast<double>(1 << k);
        } else {
            level.grid = Grid((spec.n0 - 1) * (1 << k) + 1);
        }
        const State init = convergence_init(run_model, level.grid, spec.delta, level.newton_tol,
                                            spec.kind != ConvergenceKind::Diffusion);
        StationarySolution ref;
        ref.z = init.z;
        ref.grid = level.grid;
        ref.c = init.c;
        ref.p = init.p;
        SimulationResult run = simulate(run_model, init, level, ref);
        finals.push_back(std::move(run.final_state));
        result.grid_sizes.push_back(level.grid.size());
        result.time_steps.push_back(level.dt);
    }

    auto difference = [&](int k, char field) {
        const State& a = finals[k];
        const State& b = finals[k + 1];
        if (field == 'z') return std::abs(a.z - b.z);
        const std::vector<double>& ua = field == 'c' ? a.c : a.p;
        const std::vector<double>& ub = field == 'c' ? b.c : b.p;
        const int stride = (static_cast<int>(ub.size()) - 1) / (static_cast<int>(ua.size()) - 1);
        double d = 0.0;
        for (std::size_t i = 0; i < ua.size(); ++i) d = std::max(d, std::abs(ua[i] - ub[i * stride]));
        return d;
    };

    const std::vector<char> fields = spec.kind == ConvergenceKind::Diffusion
                                         ? std::vector<char>{'c'}
                                         : std::vector<char>{'c', 'p', 'z'};
    for (char f : fields) {
        FieldOrders fo;
        fo.field = std::string(1, f);
        for (int k = 0; k + 1 < spec.levels; ++k) fo.differences.push_back(difference(k, f));
        for (std::size_t k = 0; k + 1 < fo.differences.size(); ++k) {
            const double a = fo.differences[k], b = fo.differences[k + 1];
            if (!(b < a) || !(b > 0.0)) fo.inconclusive = true;
            fo.orders.push_back(b > 0.0 && a > 0.0 ? std::log2(a / b) : NAN);
        }
        if (fo.inconclusive)
            spdlog::warn("self-convergence {}: differences of {} are not decreasing",
                         convergence_kind_name(spec.kind), fo.field);
        result.fields.push_back(std::move(fo));
    }
    return result;
}

} // namespace spheroid
