#include "spheroid/spheroid.h"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out, resume, stationary, seed, eps, delta, tend, grid_n, dt;
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("-c,--config", o.config, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", o.out, "output directory");
    sub->add_option("--grid-n", o.grid_n, "number of grid nodes");
}

void add_run(CLI::App* sub, Overrides& o) {
    sub->add_option("--eps", o.eps, "nutrient relaxation parameter");
    sub->add_option("--dt", o.dt, "time step");
    sub->add_option("--stationary", o.stationary, "precomputed stationary snapshot");
}

int report(sph_status st) {
    if (st == SPH_OK) return 0;
    std::fprintf(stderr, "spheroid: %s: %s", sph_status_name(st), sph_last_error());
    if (*sph_error_key()) std::fprintf(stderr, " [%s]", sph_error_key());
    std::fputc('\n', stderr);
    return st == SPH_ERR_CONFIG ? 2 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stationary states and stability of a radially symmetric tumor spheroid model"};
    app.set_version_flag("--version", std::string(sph_version()));
    app.require_subcommand(1);

    Overrides o;
    CLI::App* check = app.add_subcommand("check-assumptions", "check structural conditions on the rates");
    CLI::App* lemma = app.add_subcommand("lemma31", "verify the a-priori bounds on the nutrient profile");
    CLI::App* stat = app.add_subcommand("stationary", "compute and verify the stationary solution");
    CLI::App* sim = app.add_subcommand("simulate", "run one perturbed trajectory");
    CLI::App* stab = app.add_subcommand("stability", "run the perturbation grid and fit decay rates");
    CLI::App* conv = app.add_subcommand("convergence", "self-convergence studies in h and dt");
    for (CLI::App* sub : {check, lemma, stat, sim, stab, conv}) add_common(sub, o);
    for (CLI::App* sub : {stat, sim, stab, conv}) add_run(sub, o);
    for (CLI::App* sub : {sim, stab}) {
        sub->add_option("--delta", o.delta, "perturbation amplitude");
        sub->add_option("--seed", o.seed, "seed of the random perturbation shape");
    }
    sim->add_option("--resume", o.resume, "snapshot to continue from")->check(CLI::ExistingFile);
    sim->add_option("--tend", o.tend, "final time");
    stab->add_option("--tend", o.tend, "final time of each cell");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    const bool stability = chosen == stab;

    sph_config* cfg = nullptr;
    sph_status st = o.config.empty() ? sph_config_default(&cfg) : sph_config_load(o.config.c_str(), &cfg);
    if (st != SPH_OK) return report(st);

    const std::vector<std::pair<const std::optional<std::string>*, const char*>> mapping{
        {&o.out, "paths.out_dir"},
        {&o.resume, "paths.resume"},
        {&o.stationary, "paths.stationary"},
        {&o.grid_n, "grid.N"},
        {&o.eps, stability ? "experiment.eps_list" : "solver.eps"},
        {&o.delta, stability ? "experiment.delta_list" : "experiment.delta"},
        {&o.seed, stability ? "experiment.seeds" : "experiment.seed"},
        {&o.tend, "solver.t_end"},
        {&o.dt, "solver.dt"},
    };
    for (const auto& [value, key] : mapping) {
        if (!*value) continue;
        st = sph_config_set(cfg, key, (*value)->c_str());
        if (st != SPH_OK) {
            sph_config_free(cfg);
            return report(st);
        }
    }

    int exit_status = 0;
    st = sph_run(cfg, command.c_str(), &exit_status);
    sph_config_free(cfg);
    if (st != SPH_OK) return report(st);
    return exit_status;
}
