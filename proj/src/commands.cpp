#include "spheroid/commands.hpp"

#include "spheroid/analysis.hpp"
#include "spheroid/csv.hpp"
#include "spheroid/error.hpp"
#include "spheroid/nutrient_profile.hpp"
#include "spheroid/snapshot.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>

namespace spheroid {

namespace fs = std::filesystem;

namespace {

fs::path ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::string step_name(const State& s, double dt) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "snapshot_%08ld.sph", std::lround(s.t / dt));
    return buf;
}

Snapshot make_snapshot(const State& s, const RunConfig& config) {
    Snapshot snap;
    snap.state = s;
    snap.config_hash = config_hash(config);
    snap.code_version = code_version();
    return snap;
}

void print_stationary(const StationarySolution& sol, const RunConfig& config, std::ostream& out) {
    out << std::setprecision(12);
    out << "z*                   " << sol.z << "   (R* = " << std::exp(sol.z) << ")\n";
    out << "z* shooting          " << sol.z_direct << "\n";
    out << std::setprecision(4) << std::scientific;
    out << "method gap           " << sol.method_gap() << "   (tol " << config.stationary.agreement_tol << ")\n";
    out << "|v*(1)|              " << sol.v1_residual << "   (tol " << config.v1_tol << ")\n";
    out << "transport residual   " << sol.transport_residual << "   (tol " << config.transport_tol << ")\n";
    out << "max|c* - m(z*)|      " << sol.c_mismatch << "\n";
    out << std::defaultfloat << std::setprecision(6);
    out << "relaxation           " << sol.relaxation_steps << " steps, t = " << sol.relaxation_time << "\n";
    out << "c*(0) = " << sol.c.front() << ", p*(0) = " << sol.p.front()
        << ", p*(1) = " << sol.p.back() << "\n";
}

bool stationary_ok(const StationarySolution& sol, const RunConfig& config) {
    return sol.v1_residual <= config.v1_tol && sol.transport_residual <= config.transport_tol &&
           sol.c_mismatch <= 1e-8 && sol.method_gap() <= config.stationary.agreement_tol;
}

} // namespace

StationarySolution obtain_stationary(const RunConfig& config) {
    if (config.stationary_path.empty())
        return solve_stationary(config.model, config.solver.grid, config.stationary_options());
    const Snapshot snap = load_snapshot(config.stationary_path, config.solver.grid.size());
    StationarySolution sol;
    sol.z = snap.state.z;
    sol.grid = snap.state.grid;
    sol.c = snap.state.c;
    sol.p = snap.state.p;
    compute_stationary_residuals(config.model, sol, config.solver.newton_tol);
    sol.z_direct =
        solve_stationary_direct(config.model, sol.grid, config.stationary_options()).z;
    spdlog::info("stationary solution loaded from {}", config.stationary_path);
    return sol;
}

int run_check_assumptions(const RunConfig& config, std::ostream& out) {
    const AssumptionReport report = check_assumptions(config.model);
    out << report.to_text();
    return report.all_passed() ? 0 : 1;
}

int run_lemma31(const RunConfig& config, std::ostream& out) {
    const Lemma31Report report = check_lemma31(config.model, config.bound_z, config.solver.grid);
    out << report.to_text();
    std::vector<double> flux;
    out << std::scientific << std::setprecision(3);
    for (double z : config.bound_z) {
        const MProfile prof = solve_m(config.model, z, config.solver.grid);
        out << "flux identity residual at z = " << std::defaultfloat << z << ": " << std::scientific
            << flux_identity_residual(prof, config.model) << '\n';
    }
    out << std::defaultfloat;
    return report.all_passed() ? 0 : 1;
}

int run_stationary(const RunConfig& config, std::ostream& out) {
    const StationarySolution sol = obtain_stationary(config);
    const fs::path dir = ensure_dir(config.out_dir);
    save_snapshot(make_snapshot(sol.as_state(), config), (dir / "stationary.sph").string());
    write_profile((dir / "stationary_profile.csv").string(), sol);
    print_stationary(sol, config, out);
    const bool ok = stationary_ok(sol, config);
    out << (ok ? "stationary solution accepted" : "stationary solution check FAILED") << '\n';
    return ok ? 0 : 1;
}

int run_simulate(const RunConfig& config, std::ostream& out) {
    const StationarySolution stationary = obtain_stationary(config);
    const fs::path dir = ensure_dir(config.out_dir);
    const fs::path snap_dir = ensure_dir(dir / "snapshots");
    const std::string series_path = (dir / "timeseries.csv").string();

    State init;
    std::optional<State> previous;
    if (!config.resume.empty()) {
        const Snapshot snap = load_snapshot(config.resume, config.solver.grid.size());
        if (snap.config_hash != config_hash(config))
            spdlog::warn("resuming from a snapshot written under a different configuration");
        init = snap.state;
        previous = snap.state;
        truncate_timeseries(series_path, init.t);
        out << "resuming from t = " << init.t << '\n';
    } else {
        const AdmissibleInit ai = admissible_init(stationary, config.delta, config.shape, config.seed,
                                                  config.solver.strict_boundary_p);
        for (const auto& c : ai.conditions)
            out << "initial condition " << c.name << ": " << (c.passed ? "ok" : "violated") << '\n';
        init = ai.state;
    }

    SimulationHooks hooks;
    hooks.on_snapshot = [&](const State& s) {
        save_snapshot(make_snapshot(s, config), (snap_dir / step_name(s, config.solver.dt)).string());
    };
    SimulationResult result;
    try {
        result = simulate(config.model, init, config.solver, stationary, hooks, previous);
    } catch (const NumericError& e) {
        out << "run aborted: " << e.what() << "; last good state saved in " << snap_dir.string() << '\n';
        throw;
    }
    if (previous)
        append_timeseries(series_path, result.series);
    else
        write_timeseries(series_path, result.series);
    save_snapshot(make_snapshot(result.final_state, config), (dir / "final.sph").string());

    const TimeRecord& last = result.series.empty() ? TimeRecord{} : result.series.back();
    out << std::setprecision(6);
    out << "t_end = " << result.final_state.t << ", R = " << result.final_state.radius()
        << ", records = " << result.series.size() << (result.early_stopped ? " (early stop)" : "")
        << '\n';
    out << std::scientific << std::setprecision(3);
    const auto norms = decay_norms(last.deviation);
    for (std::size_t j = 0; j < kDecayNormCount; ++j)
        out << "  final " << kDecayNormNames[j] << " = " << norms[j] << '\n';
    out << "  final eta = " << last.deviation.eta << '\n';
    out << "clip events: " << result.clips.events.size() << " (max violation "
        << result.clips.max_violation << ", beyond tolerance "
        << result.clips.beyond(config.solver.clip_tol) << ")\n";
    out << std::defaultfloat;
    for (const auto& w : result.warnings) out << "warning: " << w << '\n';
    return 0;
}

int run_stability(const RunConfig& config, std::ostream& out) {
    const StationarySolution stationary = obtain_stationary(config);
    const fs::path dir = ensure_dir(config.out_dir);
    const fs::path cell_dir = ensure_dir(dir / "cells");

    auto cell_file = [&](const StabilityCell& c) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "eps%s_delta%s_%s_seed%llu.csv", format_double(c.eps).c_str(),
                      format_double(c.delta).c_str(), std::string(shape_name(c.shape)).c_str(),
                      static_cast<unsigned long long>(c.seed));
        return (cell_dir / buf).string();
    };
    const StabilityReport report = stability_experiment(
        config.model, config.solver, stationary, config.experiment,
        [&](const StabilityCell& c) { write_timeseries(cell_file(c), c.series); });
    write_stability_report((dir / "stability_report.csv").string(), report);

    bool failed = false;
    for (const auto& c : report.cells) {
        double mu_min = INFINITY;
        for (const auto& f : c.fits)
            if (f) mu_min = std::min(mu_min, f->mu);
        out << "eps=" << c.eps << " delta=" << c.delta << " shape=" << shape_name(c.shape)
            << " seed=" << c.seed << "  " << c.status;
        if (std::isfinite(mu_min)) out << "  min mu = " << mu_min;
        if (c.crossing_time >= 0.0) out << "  crossing t = " << c.crossing_time;
        out << '\n';
        failed = failed || !c.decay_observed();
    }
    out << "max relative mu spread across delta: " << report.max_mu_spread() << '\n';
    if (report.eps0_proxy >= 0.0)
        out << "largest eps with observed decay (empirical eps0 proxy): " << report.eps0_proxy << '\n';
    else
        out << "no eps with observed decay in every cell\n";
    return failed ? 1 : 0;
}

int run_convergence(const RunConfig& config, std::ostream& out) {
    std::vector<ConvergenceResult> results;
    bool failed = false;
    for (ConvergenceKind kind : config.convergence_studies) {
        ConvergenceSpec spec = config.convergence;
        spec.kind = kind;
        results.push_back(self_convergence(config.model, config.solver, spec));
        const ConvergenceResult& r = results.back();
        for (const auto& f : r.fields) {
            const double thr = convergence_threshold(kind, f.field);
            const double order = f.finest_order();
            const bool gated = std::isfinite(thr);
            const bool ok = !gated || (!f.inconclusive && order >= thr);
            out << convergence_kind_name(kind) << " " << f.field << ": orders";
            for (double o : f.orders) out << ' ' << std::setprecision(3) << o;
            if (f.inconclusive) out << " (inconclusive)";
            if (gated) out << "  threshold " << thr << (ok ? " pass" : " FAIL");
            out << '\n';
            failed = failed || !ok;
        }
    }
    const fs::path dir = ensure_dir(config.out_dir);
    write_convergence((dir / "convergence.csv").string(), results);
    return failed ? 1 : 0;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"check-assumptions", "stationary", "simulate",
                                                "stability",         "convergence", "lemma31"};
    return names;
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& out) {
    if (name == "check-assumptions") return run_check_assumptions(config, out);
    if (name == "stationary") return run_stationary(config, out);
    if (name == "simulate") return run_simulate(config, out);
    if (name == "stability") return run_stability(config, out);
    if (name == "convergence") return run_convergence(config, out);
    if (name == "lemma31") return run_lemma31(config, out);
    throw DomainError("unknown command '" + name + "'");
}

} // namespace spheroid
