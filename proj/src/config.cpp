#include "spheroid/config.hpp"

#include "spheroid/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace spheroid {

namespace pt = boost::property_tree;

std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        throw ConfigError(key + ": '" + value + "' is not a number", key);
    return x;
}

long long parse_int(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    long long x = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        throw ConfigError(key + ": '" + value + "' is not an integer", key);
    return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    std::uint64_t x = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        throw ConfigError(key + ": '" + value + "' is not an unsigned integer", key);
    return x;
}

int parse_i32(const std::string& key, const std::string& value) {
    const long long x = parse_int(key, value);
    if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(key + ": value out of range", key);
    return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": '" + value + "' is not a boolean", key);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) out.push_back(parse_double(key, item));
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += fmt(items[i]);
    }
    return out;
}

// Parameters a family reads; all others are rejected.
bool family_uses(RateFamily family, std::string_view param) {
    switch (family) {
    case RateFamily::Zero: return false;
    case RateFamily::Linear: return param == "slope";
    case RateFamily::Sigmoid:
        return param == "amplitude" || param == "steepness" || param == "midpoint";
    }
    return false;
}

// Parameters for a newly selected family: the default model's when it uses
// the same family for this rate, neutral values otherwise.
RateFunction family_defaults(RateId id, RateFamily family) {
    const RateFunction def = RateModel::default_model().rate(id);
    if (def.family == family) return def;
    switch (family) {
    case RateFamily::Zero: return RateFunction::zero();
    case RateFamily::Linear: return RateFunction::linear(1.0);
    case RateFamily::Sigmoid: return RateFunction::sigmoid(1.0, 1.0, 0.5);
    }
    return RateFunction::zero();
}

void set_rate_param(RateFunction& fn, const std::string& key, const std::string& param,
                    const std::string& value) {
    if (!family_uses(fn.family, param)) {
        if (param == "slope" || param == "amplitude" || param == "steepness" || param == "midpoint")
            throw ConfigError(key + ": parameter '" + param + "' is not used by family '" +
                                  std::string(family_name(fn.family)) + "'",
                              key);
        throw ConfigError("unknown key " + key, key);
    }
    const double x = parse_double(key, value);
    if (param == "slope") fn.slope = x;
    else if (param == "amplitude") fn.amplitude = x;
    else if (param == "steepness") fn.steepness = x;
    else fn.midpoint = x;
}

struct Entry {
    std::string key;  // section.key
    std::string value;
};

// Applies every key except the per-rate ones.
void apply_plain(RunConfig& c, const std::string& section, const std::string& name,
                 const std::string& value) {
    const std::string key = section + "." + name;
    SolverConfig& s = c.solver;
    StationaryOptions& st = c.stationary;
    ExperimentConfig& e = c.experiment;
    if (section == "rates") {
        if (name == "c_min") c.model = c.model.with_domain(parse_double(key, value), c.model.c_max());
        else if (name == "c_max") c.model = c.model.with_domain(c.model.c_min(), parse_double(key, value));
        else throw ConfigError("unknown key " + key, key);
    } else if (section == "grid") {
        if (name == "N") {
            const int n = parse_i32(key, value);
            if (n < 3) throw ConfigError("grid.N must be >= 3 (got " + trim(value) + ")", key);
            s.grid = Grid(n);
        } else {
            throw ConfigError("unknown key " + key, key);
        }
    } else if (section == "solver") {
        if (name == "eps") s.eps = parse_double(key, value);
        else if (name == "dt") s.dt = parse_double(key, value);
        else if (name == "t_end") s.t_end = parse_double(key, value);
        else if (name == "splitting_order") s.splitting_order = parse_i32(key, value);
        else if (name == "interpolation") {
            try {
                s.interpolation = interpolation_from_name(trim(value));
            } catch (const DomainError& err) {
                throw ConfigError(key + ": " + err.what(), key);
            }
        }
        else if (name == "output_every") s.output_every = parse_i32(key, value);
        else if (name == "snapshot_every") s.snapshot_every = parse_i32(key, value);
        else if (name == "newton_tol") s.newton_tol = parse_double(key, value);
        else if (name == "clip_tol") s.clip_tol = parse_double(key, value);
        else if (name == "early_stop_floor") s.early_stop_floor = parse_double(key, value);
        else if (name == "strict_boundary_p") s.strict_boundary_p = parse_bool(key, value);
        else if (name == "stationary_tol") st.tol = parse_double(key, value);
        else if (name == "stationary_t_max") st.t_max = parse_double(key, value);
        else if (name == "stationary_z_init") st.z_init = parse_double(key, value);
        else if (name == "stationary_z_lo") st.z_lo = parse_double(key, value);
        else if (name == "stationary_z_hi") st.z_hi = parse_double(key, value);
        else if (name == "stationary_consecutive") st.consecutive = parse_i32(key, value);
        else if (name == "agreement_tol") st.agreement_tol = parse_double(key, value);
        else if (name == "v1_tol") c.v1_tol = parse_double(key, value);
        else if (name == "transport_tol") c.transport_tol = parse_double(key, value);
        else throw ConfigError("unknown key " + key, key);
    } else if (section == "experiment") {
        auto shape_of = [&](const std::string& v) {
            try {
                return shape_from_name(trim(v));
            } catch (const DomainError& err) {
                throw ConfigError(key + ": " + err.what(), key);
            }
        };
        if (name == "delta") c.delta = parse_double(key, value);
        else if (name == "shape") c.shape = shape_of(value);
        else if (name == "seed") c.seed = parse_u64(key, value);
        else if (name == "eps_list") e.eps_list = parse_double_list(key, value);
        else if (name == "delta_list") e.delta_list = parse_double_list(key, value);
        else if (name == "shapes") {
            e.shapes.clear();
            for (const auto& item : split_list(value)) e.shapes.push_back(shape_of(item));
        } else if (name == "seeds") {
            e.seeds.clear();
            for (const auto& item : split_list(value)) e.seeds.push_back(parse_u64(key, item));
        }
        else if (name == "fit_floor") e.fit.floor = parse_double(key, value);
        else if (name == "tail_fraction") e.fit.tail_fraction = parse_double(key, value);
        else if (name == "min_points") e.fit.min_points = parse_i32(key, value);
        else if (name == "cell_early_stop") e.early_stop_floor = parse_double(key, value);
        else if (name == "threads") e.max_threads = parse_i32(key, value);
        else if (name == "bound_z") c.bound_z = parse_double_list(key, value);
        else if (name == "convergence_studies") {
            c.convergence_studies.clear();
            for (const auto& item : split_list(value)) {
                try {
                    c.convergence_studies.push_back(convergence_kind_from_name(item));
                } catch (const DomainError& err) {
                    throw ConfigError(key + ": " + err.what(), key);
                }
            }
        }
        else if (name == "convergence_levels") c.convergence.levels = parse_i32(key, value);
        else if (name == "convergence_n0") c.convergence.n0 = parse_i32(key, value);
        else if (name == "convergence_dt0") c.convergence.dt0 = parse_double(key, value);
        else if (name == "convergence_t_end") c.convergence.t_end = parse_double(key, value);
        else if (name == "convergence_delta") c.convergence.delta = parse_double(key, value);
        else throw ConfigError("unknown key " + key, key);
    } else if (section == "paths") {
        if (name == "out_dir") c.out_dir = trim(value);
        else if (name == "resume") c.resume = trim(value);
        else if (name == "stationary") c.stationary_path = trim(value);
        else throw ConfigError("unknown key " + key, key);
    } else {
        throw ConfigError("unknown section [" + section + "]", section);
    }
}

// Rate keys look like "K_Q.family" or "K_Q.amplitude".
std::optional<std::pair<RateId, std::string>> split_rate_key(const std::string& name) {
    const auto dot = name.find('.');
    if (dot == std::string::npos) return std::nullopt;
    try {
        return std::make_pair(rate_from_name(name.substr(0, dot)), name.substr(dot + 1));
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

// Line of `section` / `key` in the raw text, 0 when not found.
int find_line(const std::string& text, const std::string& section, const std::string& key) {
    std::istringstream in(text);
    std::string line, current;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == ';' || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            current = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) continue;
        if (current == section && (key.empty() || trim(t.substr(0, eq)) == key)) return no;
        if (key.empty() && current == section) return no;
    }
    return 0;
}

} // namespace

StationaryOptions RunConfig::stationary_options() const {
    StationaryOptions o = stationary;
    o.dt = solver.dt;
    o.splitting_order = solver.splitting_order;
    o.interpolation = solver.interpolation;
    o.newton_tol = solver.newton_tol;
    return o;
}

void RunConfig::validate() const {
    auto require = [](bool ok, const char* key, const std::string& what) {
        if (!ok) throw ConfigError(std::string(key) + " " + what, key);
    };
    require(solver.grid.size() >= 3, "grid.N", "must be >= 3");
    require(solver.eps >= 0.0, "solver.eps", "must be >= 0");
    require(solver.dt > 0.0, "solver.dt", "must be > 0");
    require(solver.t_end >= 0.0, "solver.t_end", "must be >= 0");
    require(solver.splitting_order == 1 || solver.splitting_order == 2, "solver.splitting_order",
            "must be 1 or 2");
    require(solver.output_every >= 1, "solver.output_every", "must be >= 1");
    require(solver.snapshot_every >= 0, "solver.snapshot_every", "must be >= 0");
    require(solver.newton_tol > 0.0, "solver.newton_tol", "must be > 0");
    require(solver.clip_tol >= 0.0, "solver.clip_tol", "must be >= 0");
    require(solver.early_stop_floor >= 0.0, "solver.early_stop_floor", "must be >= 0");
    require(stationary.tol > 0.0, "solver.stationary_tol", "must be > 0");
    require(stationary.t_max > 0.0, "solver.stationary_t_max", "must be > 0");
    require(stationary.z_lo < stationary.z_hi, "solver.stationary_z_lo", "must be < stationary_z_hi");
    require(stationary.consecutive >= 1, "solver.stationary_consecutive", "must be >= 1");
    require(stationary.agreement_tol > 0.0, "solver.agreement_tol", "must be > 0");
    require(v1_tol > 0.0, "solver.v1_tol", "must be > 0");
    require(transport_tol > 0.0, "solver.transport_tol", "must be > 0");
    require(model.c_min() < model.c_max(), "rates.c_min", "must be < rates.c_max");
    require(delta >= 0.0, "experiment.delta", "must be >= 0");
    for (double eps : experiment.eps_list) require(eps >= 0.0, "experiment.eps_list", "entries must be >= 0");
    for (double d : experiment.delta_list) require(d >= 0.0, "experiment.delta_list", "entries must be >= 0");
    require(!experiment.eps_list.empty(), "experiment.eps_list", "must not be empty");
    require(!experiment.delta_list.empty(), "experiment.delta_list", "must not be empty");
    require(!experiment.shapes.empty(), "experiment.shapes", "must not be empty");
    require(!experiment.seeds.empty(), "experiment.seeds", "must not be empty");
    require(experiment.fit.tail_fraction > 0.0 && experiment.fit.tail_fraction <= 1.0,
            "experiment.tail_fraction", "must be in (0, 1]");
    require(experiment.fit.min_points >= 2, "experiment.min_points", "must be >= 2");
    require(experiment.fit.floor >= 0.0, "experiment.fit_floor", "must be >= 0");
    require(experiment.early_stop_floor >= 0.0, "experiment.cell_early_stop", "must be >= 0");
    require(experiment.max_threads >= 0, "experiment.threads", "must be >= 0");
    require(convergence.levels >= 3, "experiment.convergence_levels", "must be >= 3");
    require(convergence.levels <= 12, "experiment.convergence_levels", "must be <= 12");
    require(convergence.n0 >= 3, "experiment.convergence_n0", "must be >= 3");
    require(convergence.dt0 > 0.0, "experiment.convergence_dt0", "must be > 0");
    require(convergence.t_end > 0.0, "experiment.convergence_t_end", "must be > 0");
    require(convergence.delta >= 0.0, "experiment.convergence_delta", "must be >= 0");
    require(!out_dir.empty(), "paths.out_dir", "must not be empty");
}

void set_config_value(RunConfig& config, const std::string& dotted_key, const std::string& value) {
    const auto dot = dotted_key.find('.');
    if (dot == std::string::npos) throw ConfigError("key must be section.name: " + dotted_key, dotted_key);
    const std::string section = dotted_key.substr(0, dot);
    const std::string name = dotted_key.substr(dot + 1);
    if (section == "rates") {
        if (auto rk = split_rate_key(name)) {
            const auto& [id, param] = *rk;
            RateFunction fn = config.model.rate(id);
            if (param == "family") {
                try {
                    fn = family_defaults(id, family_from_name(trim(value)));
                } catch (const DomainError& err) {
                    throw ConfigError(dotted_key + ": " + err.what(), dotted_key);
                }
            } else {
                set_rate_param(fn, dotted_key, param, value);
            }
            config.model = config.model.with_rate(id, fn);
            return;
        }
    }
    apply_plain(config, section, name, value);
}

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& err) {
        throw ConfigError("parse error at line " + std::to_string(err.line()) + ": " + err.message(),
                          "", static_cast<int>(err.line()));
    }

    RunConfig config;
    // Rate families first, so parameters apply to the selected family
    // regardless of their order in the file.
    std::vector<Entry> rate_params, plain;
    for (const auto& [section, body] : tree) {
        if (!body.data().empty())
            throw ConfigError("key outside a section: " + section, section, find_line(text, "", section));
        static const std::vector<std::string> known{"rates", "grid", "solver", "experiment", "paths"};
        if (std::find(known.begin(), known.end(), section) == known.end())
            throw ConfigError("unknown section [" + section + "]", section, find_line(text, section, ""));
        for (const auto& [name, node] : body) {
            const std::string key = section + "." + name;
            if (section == "rates" && split_rate_key(name)) {
                if (split_rate_key(name)->second == "family") {
                    try {
                        set_config_value(config, key, node.data());
                    } catch (const ConfigError& err) {
                        throw ConfigError(err.what(), key, find_line(text, section, name));
                    }
                } else {
                    rate_params.push_back({key, node.data()});
                }
            } else {
                plain.push_back({key, node.data()});
            }
        }
    }
    for (const auto* list : {&rate_params, &plain}) {
        for (const Entry& e : *list) {
            try {
                set_config_value(config, e.key, e.value);
            } catch (const ConfigError& err) {
                const auto dot = e.key.find('.');
                throw ConfigError(err.what(), e.key,
                                  find_line(text, e.key.substr(0, dot), e.key.substr(dot + 1)));
            }
        }
    }
    config.validate();
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << "\n"; };
    auto num = [](double x) { return format_double(x); };

    out << "[rates]\n";
    for (RateId id : kAllRates) {
        const RateFunction& fn = c.model.rate(id);
        const std::string n(rate_name(id));
        kv(n + ".family", std::string(family_name(fn.family)));
        if (fn.family == RateFamily::Linear) kv(n + ".slope", num(fn.slope));
        if (fn.family == RateFamily::Sigmoid) {
            kv(n + ".amplitude", num(fn.amplitude));
            kv(n + ".steepness", num(fn.steepness));
            kv(n + ".midpoint", num(fn.midpoint));
        }
    }
    kv("c_min", num(c.model.c_min()));
    kv("c_max", num(c.model.c_max()));

    out << "\n[grid]\n";
    kv("N", std::to_string(c.solver.grid.size()));

    const SolverConfig& s = c.solver;
    out << "\n[solver]\n";
    kv("eps", num(s.eps));
    kv("dt", num(s.dt));
    kv("t_end", num(s.t_end));
    kv("splitting_order", std::to_string(s.splitting_order));
    kv("interpolation", std::string(interpolation_name(s.interpolation)));
    kv("output_every", std::to_string(s.output_every));
    kv("snapshot_every", std::to_string(s.snapshot_every));
    kv("newton_tol", num(s.newton_tol));
    kv("clip_tol", num(s.clip_tol));
    kv("early_stop_floor", num(s.early_stop_floor));
    kv("strict_boundary_p", s.strict_boundary_p ? "true" : "false");
    kv("stationary_tol", num(c.stationary.tol));
    kv("stationary_t_max", num(c.stationary.t_max));
    kv("stationary_z_init", num(c.stationary.z_init));
    kv("stationary_z_lo", num(c.stationary.z_lo));
    kv("stationary_z_hi", num(c.stationary.z_hi));
    kv("stationary_consecutive", std::to_string(c.stationary.consecutive));
    kv("agreement_tol", num(c.stationary.agreement_tol));
    kv("v1_tol", num(c.v1_tol));
    kv("transport_tol", num(c.transport_tol));

    const ExperimentConfig& e = c.experiment;
    out << "\n[experiment]\n";
    kv("delta", num(c.delta));
    kv("shape", std::string(shape_name(c.shape)));
    kv("seed", std::to_string(c.seed));
    kv("eps_list", join(e.eps_list, num));
    kv("delta_list", join(e.delta_list, num));
    kv("shapes", join(e.shapes, [](Shape sh) { return std::string(shape_name(sh)); }));
    kv("seeds", join(e.seeds, [](std::uint64_t x) { return std::to_string(x); }));
    kv("fit_floor", num(e.fit.floor));
    kv("tail_fraction", num(e.fit.tail_fraction));
    kv("min_points", std::to_string(e.fit.min_points));
    kv("cell_early_stop", num(e.early_stop_floor));
    kv("threads", std::to_string(e.max_threads));
    kv("bound_z", join(c.bound_z, num));
    kv("convergence_studies", join(c.convergence_studies, [](ConvergenceKind k) {
           return std::string(convergence_kind_name(k));
       }));
    kv("convergence_levels", std::to_string(c.convergence.levels));
    kv("convergence_n0", std::to_string(c.convergence.n0));
    kv("convergence_dt0", num(c.convergence.dt0));
    kv("convergence_t_end", num(c.convergence.t_end));
    kv("convergence_delta", num(c.convergence.delta));

    out << "\n[paths]\n";
    kv("out_dir", c.out_dir);
    kv("resume", c.resume);
    kv("stationary", c.stationary_path);
    return out.str();
}

std::uint32_t config_hash(const RunConfig& config) {
    // Paths and the horizon do not change the trajectory, so extending a run
    // or moving its output keeps the hash.
    RunConfig c = config;
    c.out_dir = RunConfig{}.out_dir;
    c.resume.clear();
    c.stationary_path.clear();
    c.solver.t_end = SolverConfig{}.t_end;
    const std::string text = serialize_config(c);
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(text.data()), static_cast<uInt>(text.size())));
}

} // namespace spheroid
