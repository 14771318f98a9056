#include "spheroid/spheroid.h"

#include "spheroid/analysis.hpp"
#include "spheroid/commands.hpp"
#include "spheroid/config.hpp"
#include "spheroid/error.hpp"
#include "spheroid/snapshot.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <mutex>
#include <sstream>

struct sph_config {
    spheroid::RunConfig cfg;
};
struct sph_stationary {
    spheroid::StationarySolution sol;
};
struct sph_state {
    spheroid::State state;
};
struct sph_report {
    bool passed;
    std::string text;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_key;

void init_logging() {
    static std::once_flag once;
    std::call_once(once, [] {
        auto logger = spdlog::stderr_color_mt("spheroid");
        spdlog::set_default_logger(logger);
        spdlog::set_pattern("[%l] %v");
        const char* level = std::getenv("SPHEROID_LOG");
        spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
    });
}

sph_status fail(sph_status status, const std::string& what, const std::string& key = {}) {
    g_error = what;
    g_error_key = key;
    return status;
}

template <class F>
sph_status guarded(F&& body) {
    init_logging();
    g_error.clear();
    g_error_key.clear();
    try {
        body();
        return SPH_OK;
    } catch (const spheroid::ConfigError& e) {
        std::string msg = e.what();
        if (e.line() > 0) msg = "line " + std::to_string(e.line()) + ": " + msg;
        return fail(SPH_ERR_CONFIG, msg, e.key());
    } catch (const spheroid::IoError& e) {
        return fail(SPH_ERR_IO, e.what());
    } catch (const spheroid::FormatError& e) {
        return fail(SPH_ERR_FORMAT, e.what());
    } catch (const spheroid::ConvergenceError& e) {
        return fail(SPH_ERR_CONVERGENCE, e.what());
    } catch (const spheroid::NumericError& e) {
        return fail(SPH_ERR_NUMERIC, e.what());
    } catch (const spheroid::DomainError& e) {
        return fail(SPH_ERR_DOMAIN, e.what());
    } catch (const spheroid::InsufficientDataError& e) {
        return fail(SPH_ERR_INSUFFICIENT_DATA, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SPH_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SPH_ERR_INTERNAL, e.what());
    }
}

sph_status copy_out(const std::string& s, char* buffer, size_t size, size_t* needed) {
    if (needed) *needed = s.size() + 1;
    if (size > 0) {
        if (!buffer) return fail(SPH_ERR_INVALID_ARGUMENT, "buffer is null");
        const size_t n = std::min(size - 1, s.size());
        std::memcpy(buffer, s.data(), n);
        buffer[n] = '\0';
    }
    return SPH_OK;
}

#define SPH_REQUIRE(cond, msg) \
    if (!(cond)) return fail(SPH_ERR_INVALID_ARGUMENT, msg)

} // namespace

extern "C" {

const char* sph_last_error(void) { return g_error.c_str(); }
const char* sph_error_key(void) { return g_error_key.c_str(); }
const char* sph_version(void) { return spheroid::code_version(); }

const char* sph_status_name(sph_status status) {
    switch (status) {
    case SPH_OK: return "ok";
    case SPH_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SPH_ERR_CONFIG: return "configuration error";
    case SPH_ERR_IO: return "i/o error";
    case SPH_ERR_FORMAT: return "format error";
    case SPH_ERR_CONVERGENCE: return "convergence failure";
    case SPH_ERR_NUMERIC: return "numeric failure";
    case SPH_ERR_DOMAIN: return "domain error";
    case SPH_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case SPH_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

sph_status sph_config_default(sph_config** out) {
    SPH_REQUIRE(out, "out is null");
    return guarded([&] { *out = new sph_config{}; });
}

sph_status sph_config_load(const char* path, sph_config** out) {
    SPH_REQUIRE(path && out, "null argument");
    return guarded([&] { *out = new sph_config{spheroid::load_config(path)}; });
}

sph_status sph_config_parse(const char* text, sph_config** out) {
    SPH_REQUIRE(text && out, "null argument");
    return guarded([&] { *out = new sph_config{spheroid::parse_config(text)}; });
}

sph_status sph_config_set(sph_config* cfg, const char* key, const char* value) {
    SPH_REQUIRE(cfg && key && value, "null argument");
    return guarded([&] { spheroid::set_config_value(cfg->cfg, key, value); });
}

sph_status sph_config_serialize(const sph_config* cfg, char* buffer, size_t size, size_t* needed) {
    SPH_REQUIRE(cfg, "config is null");
    sph_status st = SPH_OK;
    const sph_status g = guarded([&] {
        st = copy_out(spheroid::serialize_config(cfg->cfg), buffer, size, needed);
    });
    return g != SPH_OK ? g : st;
}

sph_status sph_config_validate(const sph_config* cfg) {
    SPH_REQUIRE(cfg, "config is null");
    return guarded([&] { cfg->cfg.validate(); });
}

uint32_t sph_config_hash(const sph_config* cfg) {
    return cfg ? spheroid::config_hash(cfg->cfg) : 0u;
}

void sph_config_free(sph_config* cfg) { delete cfg; }

sph_status sph_run(const sph_config* cfg, const char* command, int* exit_status) {
    SPH_REQUIRE(cfg && command && exit_status, "null argument");
    return guarded([&] {
        cfg->cfg.validate();
        *exit_status = spheroid::run_command(command, cfg->cfg, std::cout);
        std::cout.flush();
    });
}

sph_status sph_run_captured(const sph_config* cfg, const char* command, int* exit_status,
                            char* buffer, size_t size, size_t* needed) {
    SPH_REQUIRE(cfg && command && exit_status, "null argument");
    std::ostringstream out;
    const sph_status st = guarded([&] {
        cfg->cfg.validate();
        *exit_status = spheroid::run_command(command, cfg->cfg, out);
    });
    const std::string saved_error = g_error, saved_key = g_error_key;
    const sph_status cs = copy_out(out.str(), buffer, size, needed);
    if (st != SPH_OK) return fail(st, saved_error, saved_key);
    return cs;
}

sph_status sph_check_assumptions(const sph_config* cfg, sph_report** out) {
    SPH_REQUIRE(cfg && out, "null argument");
    return guarded([&] {
        const auto r = spheroid::check_assumptions(cfg->cfg.model);
        *out = new sph_report{r.all_passed(), r.to_text()};
    });
}

sph_status sph_lemma31(const sph_config* cfg, sph_report** out) {
    SPH_REQUIRE(cfg && out, "null argument");
    return guarded([&] {
        const auto r =
            spheroid::check_lemma31(cfg->cfg.model, cfg->cfg.bound_z, cfg->cfg.solver.grid);
        *out = new sph_report{r.all_passed(), r.to_text()};
    });
}

int sph_report_passed(const sph_report* report) { return report && report->passed ? 1 : 0; }
const char* sph_report_text(const sph_report* report) { return report ? report->text.c_str() : ""; }
void sph_report_free(sph_report* report) { delete report; }

sph_status sph_stationary_solve(const sph_config* cfg, sph_stationary** out) {
    SPH_REQUIRE(cfg && out, "null argument");
    return guarded([&] {
        cfg->cfg.validate();
        *out = new sph_stationary{spheroid::obtain_stationary(cfg->cfg)};
    });
}

double sph_stationary_z(const sph_stationary* st) { return st ? st->sol.z : 0.0; }
size_t sph_stationary_size(const sph_stationary* st) { return st ? st->sol.c.size() : 0; }

sph_status sph_stationary_field(const sph_stationary* st, const char* name, double* out) {
    SPH_REQUIRE(st && name && out, "null argument");
    const auto& s = st->sol;
    const std::vector<double> r = s.grid.nodes();
    const std::vector<double>* src = nullptr;
    if (!std::strcmp(name, "r")) src = &r;
    else if (!std::strcmp(name, "c")) src = &s.c;
    else if (!std::strcmp(name, "p")) src = &s.p;
    else if (!std::strcmp(name, "v")) src = &s.v;
    if (!src) return fail(SPH_ERR_INVALID_ARGUMENT, std::string("unknown field '") + name + "'");
    std::copy(src->begin(), src->end(), out);
    return SPH_OK;
}

sph_status sph_stationary_residuals(const sph_stationary* st, double* v1_residual,
                                    double* transport_residual, double* z_direct) {
    SPH_REQUIRE(st, "stationary is null");
    if (v1_residual) *v1_residual = st->sol.v1_residual;
    if (transport_residual) *transport_residual = st->sol.transport_residual;
    if (z_direct) *z_direct = st->sol.z_direct;
    return SPH_OK;
}

sph_status sph_stationary_state(const sph_stationary* st, sph_state** out) {
    SPH_REQUIRE(st && out, "null argument");
    return guarded([&] { *out = new sph_state{st->sol.as_state()}; });
}

void sph_stationary_free(sph_stationary* st) { delete st; }

sph_status sph_state_load(const char* path, sph_state** out) {
    SPH_REQUIRE(path && out, "null argument");
    return guarded([&] { *out = new sph_state{spheroid::load_snapshot(path).state}; });
}

sph_status sph_state_save(const sph_state* state, const sph_config* cfg, const char* path) {
    SPH_REQUIRE(state && path, "null argument");
    return guarded([&] {
        spheroid::Snapshot snap;
        snap.state = state->state;
        snap.config_hash = cfg ? spheroid::config_hash(cfg->cfg) : 0u;
        snap.code_version = spheroid::code_version();
        spheroid::save_snapshot(snap, path);
    });
}

sph_status sph_state_info(const sph_state* state, double* t, double* z, size_t* n) {
    SPH_REQUIRE(state, "state is null");
    if (t) *t = state->state.t;
    if (z) *z = state->state.z;
    if (n) *n = state->state.c.size();
    return SPH_OK;
}

sph_status sph_state_field(const sph_state* state, const char* name, double* out) {
    SPH_REQUIRE(state && name && out, "null argument");
    const auto& s = state->state;
    const std::vector<double> r = s.grid.nodes();
    const std::vector<double>* src = nullptr;
    if (!std::strcmp(name, "r")) src = &r;
    else if (!std::strcmp(name, "c")) src = &s.c;
    else if (!std::strcmp(name, "p")) src = &s.p;
    if (!src) return fail(SPH_ERR_INVALID_ARGUMENT, std::string("unknown field '") + name + "'");
    std::copy(src->begin(), src->end(), out);
    return SPH_OK;
}

void sph_state_free(sph_state* state) { delete state; }

sph_status sph_fit_decay(const double* t, const double* y, size_t n, double tail_fraction,
                         double floor, int min_points, double* mu, double* C) {
    SPH_REQUIRE((t && y) || n == 0, "null samples");
    return guarded([&] {
        spheroid::DecayFitOptions opts{tail_fraction, floor, min_points};
        const auto fit = spheroid::fit_decay(std::vector<double>(t, t + n),
                                             std::vector<double>(y, y + n), opts);
        if (mu) *mu = fit.mu;
        if (C) *C = fit.C;
    });
}

} // extern "C"
