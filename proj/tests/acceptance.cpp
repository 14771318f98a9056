// Acceptance suite. One line per criterion, exit status 1 if any fails.

#include "spheroid/analysis.hpp"
#include "spheroid/config.hpp"
#include "spheroid/csv.hpp"
#include "spheroid/nutrient_profile.hpp"
#include "spheroid/snapshot.hpp"
#include "spheroid/stationary.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace spheroid;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const RateModel kModel = RateModel::default_model();

const StationarySolution& stationary(int n) {
    static std::map<int, StationarySolution> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, solve_stationary(kModel, Grid(n))).first;
    return it->second;
}

SolverConfig solver(int n, double eps, double t_end) {
    SolverConfig cfg;
    cfg.grid = Grid(n);
    cfg.eps = eps;
    cfg.t_end = t_end;
    return cfg;
}

double state_gap(const State& a, const State& b) {
    return std::max({max_abs_diff(a.c, b.c), max_abs_diff(a.p, b.p), std::abs(a.z - b.z)});
}

void nutrient_bounds(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const Lemma31Report rep = check_lemma31(kModel, {-1.0, 0.0, 1.0}, Grid(401), 1e-8);
    const double elapsed = seconds_since(t0);
    double worst = INFINITY;
    for (const auto& e : rep.entries)
        for (const auto& b : e.bounds) worst = std::min(worst, b.worst_slack);
    o.require(rep.all_passed(), "bound violated");
    o.require(worst >= -1e-8, "slack below -1e-8");
    o.require(elapsed < 5.0, "runtime >= 5 s");
    o.detail << "N=401, z in {-1,0,1}, worst relative slack " << worst << ", " << elapsed << " s";
}

double sinh_error(int n) {
    const RateModel lin = RateModel::zero_model().with_rate(RateId::F, RateFunction::linear(1.0));
    const Grid g(n);
    const MProfile prof = solve_m(lin, 0.0, g);
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = g.r(i);
        const double exact = r == 0.0 ? 1.0 / std::sinh(1.0) : std::sinh(r) / (r * std::sinh(1.0));
        err = std::max(err, std::abs(prof.m[i] - exact));
    }
    return err;
}

void closed_form(Outcome& o) {
    const double e1 = sinh_error(101), e2 = sinh_error(201), e3 = sinh_error(401);
    const double q1 = std::log2(e1 / e2), q2 = std::log2(e2 / e3);
    o.require(std::abs(q1 - 2.0) <= 0.2 && std::abs(q2 - 2.0) <= 0.2, "order outside 2 +- 0.2");
    o.require(e3 < 1e-5, "error at N=401 >= 1e-5");
    o.detail << "errors " << e1 << ", " << e2 << ", " << e3 << "; orders " << q1 << ", " << q2;
}

void flux_identity(Outcome& o) {
    double worst = 0.0;
    for (double z : {-1.0, 0.0, 1.0})
        worst = std::max(worst, flux_identity_residual(solve_m(kModel, z, Grid(401)), kModel));
    o.require(worst < 5e-5, "residual >= 5e-5");
    o.detail << "N=401, max residual " << worst;
}

void stationarity(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const StationarySolution& st = stationary(401);
    o.detail << "|v*(1)| " << st.v1_residual << ", transport residual " << st.transport_residual
             << ", |z_relax - z_shoot| " << st.method_gap() << " (" << seconds_since(t0) << " s)";
    o.require(st.v1_residual <= 1e-6, "|v*(1)| > 1e-6");
    o.require(st.transport_residual <= 1e-4, "transport residual > 1e-4");
    o.require(st.method_gap() <= 1e-4, "methods disagree");

    for (double eps : {0.0, 0.05}) {
        SolverConfig cfg = solver(401, eps, 0.0);
        cfg.t_end = 1000 * cfg.dt;
        cfg.output_every = 1;
        const SimulationResult run = simulate(kModel, st.as_state(), cfg, st);
        double worst = 0.0;
        for (const auto& rec : run.series)
            for (double v : decay_norms(rec.deviation)) worst = std::max(worst, v);
        o.require(run.series.size() == 1001, "1000 steps not completed");
        o.require(worst < 1e-4, "deviation >= 1e-4 after 1000 steps");
        o.detail << "; 1000 steps eps=" << eps << ": max norm " << worst;
    }
}

void stability(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig defaults;
    const StabilityReport rep =
        stability_experiment(kModel, defaults.solver, stationary(defaults.solver.grid.size()),
                             defaults.experiment);
    const double elapsed = seconds_since(t0);
    double mu_min = INFINITY;
    double last_crossing = 0.0;
    for (const auto& c : rep.cells) {
        o.require(c.converged, "norms not below delta/10 for eps=" + format_double(c.eps) +
                                   " delta=" + format_double(c.delta));
        for (const auto& f : c.fits) {
            o.require(f && f->mu > 0.0, "mu <= 0 or missing fit");
            if (f) mu_min = std::min(mu_min, f->mu);
        }
        last_crossing = std::max(last_crossing, c.crossing_time);
    }
    o.require(rep.cells.size() == 12, "expected 12 cells");
    o.require(rep.max_mu_spread() < 0.2, "mu spread across delta >= 20%");
    o.require(elapsed < 180.0, "runtime >= 3 min");
    o.detail << rep.cells.size() << " cells, min mu " << mu_min << ", max mu spread "
             << rep.max_mu_spread() << ", latest crossing t=" << last_crossing << ", " << elapsed << " s";
}

void quasi_static(Outcome& o) {
    const int n = 201;
    const StationarySolution& st = stationary(n);
    const State init = admissible_init(st, 0.01, Shape::Polynomial, 1).state;
    SolverConfig cfg = solver(n, 0.0, 10.0);
    cfg.output_every = 1;
    const SimulationResult ref = simulate(kModel, init, cfg, st);
    double eta = 0.0;
    for (const auto& rec : ref.series) eta = std::max(eta, rec.deviation.eta);
    o.require(eta <= 1e-8, "eta > 1e-8 for eps = 0");
    o.detail << "eps=0 max eta " << eta << "; gaps at t=10:";

    double prev = INFINITY;
    for (double eps : {0.1, 0.05, 0.025}) {
        cfg.eps = eps;
        const double gap = state_gap(simulate(kModel, init, cfg, st).final_state, ref.final_state);
        o.require(gap < prev, "gap not decreasing at eps=" + format_double(eps));
        o.detail << " eps=" << eps << ": " << gap;
        prev = gap;
    }
}

void range_invariance(Outcome& o) {
    const int n = 201;
    const StationarySolution& st = stationary(n);
    double lo = INFINITY, hi = -INFINITY;
    std::size_t clips = 0, beyond = 0, runs = 0;
    for (double eps : {0.0, 0.01, 0.05, 0.1}) {
        for (double delta : {0.01, 0.05}) {
            for (Shape shape : {Shape::Polynomial, Shape::Cosine, Shape::Random}) {
                SolverConfig cfg = solver(n, eps, 20.0);
                cfg.output_every = 1;
                SimulationHooks hooks;
                hooks.on_record = [&](const TimeRecord&, const State& s) {
                    for (const auto* f : {&s.c, &s.p})
                        for (double v : *f) {
                            lo = std::min(lo, v);
                            hi = std::max(hi, v);
                        }
                };
                const auto init = admissible_init(st, delta, shape, 2).state;
                const SimulationResult run = simulate(kModel, init, cfg, st, hooks);
                clips += run.clips.events.size();
                beyond += run.clips.beyond(1e-10);
                ++runs;
            }
        }
    }
    o.require(lo >= -1e-10 && hi <= 1.0 + 1e-10, "value outside [-1e-10, 1+1e-10]");
    o.require(beyond == 0, "clip events beyond rounding level");
    o.detail << runs << " runs, every step: min " << lo << ", max " << hi << ", clip events " << clips
             << " (" << beyond << " beyond 1e-10)";
}

void self_convergence_orders(Outcome& o) {
    const RunConfig defaults;
    for (ConvergenceKind kind : {ConvergenceKind::Diffusion, ConvergenceKind::Transport, ConvergenceKind::Time}) {
        ConvergenceSpec spec = defaults.convergence;
        spec.kind = kind;
        const ConvergenceResult r = self_convergence(kModel, defaults.solver, spec);
        for (const auto& f : r.fields) {
            const double thr = convergence_threshold(kind, f.field);
            o.detail << convergence_kind_name(kind) << " " << f.field << " " << f.finest_order() << "; ";
            if (std::isnan(thr)) continue;
            o.require(!f.inconclusive && f.finest_order() >= thr,
                      std::string(convergence_kind_name(kind)) + " " + f.field + " below " + format_double(thr));
        }
    }
}

void determinism(Outcome& o) {
    const int n = 101;
    const StationarySolution& st = stationary(n);
    for (double eps : {0.0, 0.05}) {
        SolverConfig cfg = solver(n, eps, 8.0);
        cfg.output_every = 4;
        const State init = admissible_init(st, 0.01, Shape::Random, 9).state;
        const SimulationResult a = simulate(kModel, init, cfg, st);
        const SimulationResult b = simulate(kModel, init, cfg, st);
        std::string rows_a, rows_b;
        for (const auto& r : a.series) rows_a += timeseries_row(r) + '\n';
        for (const auto& r : b.series) rows_b += timeseries_row(r) + '\n';
        o.require(a.final_state == b.final_state && rows_a == rows_b, "repeated runs differ");

        // Interrupt at t = 4 through an encoded snapshot and continue.
        SolverConfig half = cfg;
        half.t_end = 4.0;
        const SimulationResult first = simulate(kModel, init, half, st);
        const Snapshot snap = decode_snapshot(encode_snapshot({first.final_state, kSnapshotVersion, 0, "x"}));
        const SimulationResult second = simulate(kModel, snap.state, cfg, st, {}, snap.state);
        std::string rows_r;
        for (const auto& r : first.series) rows_r += timeseries_row(r) + '\n';
        for (const auto& r : second.series) rows_r += timeseries_row(r) + '\n';
        o.require(second.final_state == a.final_state, "resumed final state differs");
        o.require(rows_r == rows_a, "resumed time series differs");
    }

    // Concurrent cells do not change the report.
    ExperimentConfig exp;
    exp.eps_list = {0.0, 0.05};
    exp.shapes = {Shape::Polynomial, Shape::Random};
    SolverConfig cfg = solver(n, 0.0, 10.0);
    exp.max_threads = 1;
    const StabilityReport serial = stability_experiment(kModel, cfg, st, exp);
    exp.max_threads = 4;
    const StabilityReport parallel = stability_experiment(kModel, cfg, st, exp);
    bool same = serial.cells.size() == parallel.cells.size();
    for (std::size_t i = 0; same && i < serial.cells.size(); ++i)
        for (std::size_t j = 0; j < kDecayNormCount; ++j)
            same = same && serial.cells[i].fits[j].has_value() == parallel.cells[i].fits[j].has_value() &&
                   (!serial.cells[i].fits[j] || serial.cells[i].fits[j]->mu == parallel.cells[i].fits[j]->mu);
    o.require(same, "threaded stability report differs");
    o.detail << "repeat, resume at t=4 (eps 0 and 0.05) and threaded cells: bit-identical";
}

} // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"nutrient a-priori bounds", nutrient_bounds},
        {"sinh closed form", closed_form},
        {"flux identity", flux_identity},
        {"stationary solution", stationarity},
        {"exponential stability", stability},
        {"quasi-static consistency", quasi_static},
        {"range invariance", range_invariance},
        {"self-convergence orders", self_convergence_orders},
        {"determinism and resume", determinism},
    };
    int failures = 0;
    int k = 0;
    for (const auto& [name, run] : criteria) {
        ++k;
        Outcome o;
        o.detail.precision(4);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "[exception: " << e.what() << "]";
        }
        if (!o.pass) ++failures;
        std::printf("%s  %d  %-26s %s  (%.1f s)\n", o.pass ? "PASS" : "FAIL", k, name,
                    o.detail.str().c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", k - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
