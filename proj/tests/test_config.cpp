#include "spheroid/config.hpp"
#include "spheroid/error.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace spheroid;

namespace {

// Returns the ConfigError raised by parsing `text`, or fails the test.
ConfigError parse_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a ConfigError");
    return ConfigError("", "");
}

} // namespace

TEST_CASE("empty text gives the defaults") {
    const RunConfig c = parse_config("");
    CHECK(c == RunConfig{});
    CHECK(c.model == RateModel::default_model());
    CHECK(c.solver.grid.size() == 201);
}

TEST_CASE("serialization round trips exactly") {
    RunConfig c;
    c.solver.eps = 0.1 + 0.2;  // not representable in short decimal form
    c.solver.grid = Grid(77);
    c.experiment.eps_list = {0.0, 1.0 / 3.0};
    c.experiment.shapes = {Shape::Random};
    c.experiment.seeds = {1, 18446744073709551615ull};
    c.model = c.model.with_rate(RateId::KQ, RateFunction::sigmoid(0.7, 6.5, 0.55));
    c.convergence_studies = {ConvergenceKind::Time};
    c.out_dir = "results/run 1";
    c.stationary.agreement_tol = 3e-5;
    const RunConfig back = parse_config(serialize_config(c));
    CHECK(back == c);
    CHECK(serialize_config(back) == serialize_config(c));
}

TEST_CASE("values, comments and lists are parsed") {
    const RunConfig c = parse_config(R"(
# comment
[grid]
N = 101

[solver]
; comment
eps = 0.05
interpolation = linear
strict_boundary_p = yes

[experiment]
eps_list = 0, 0.01,0.05
shapes = cosine, random
seeds = 3, 4

[rates]
K_D.midpoint = 1.5
F.family = sigmoid
F.amplitude = 2
)");
    CHECK(c.solver.grid.size() == 101);
    CHECK(c.solver.eps == 0.05);
    CHECK(c.solver.interpolation == Interpolation::Linear);
    CHECK(c.solver.strict_boundary_p);
    CHECK(c.experiment.eps_list == std::vector<double>{0.0, 0.01, 0.05});
    CHECK(c.experiment.shapes == std::vector<Shape>{Shape::Cosine, Shape::Random});
    CHECK(c.experiment.seeds == std::vector<std::uint64_t>{3, 4});
    CHECK(c.model.rate(RateId::KD).midpoint == 1.5);
    CHECK(c.model.rate(RateId::KD).amplitude == 4.0);
    // Family switch to a new family starts from neutral sigmoid parameters.
    CHECK(c.model.rate(RateId::F) == RateFunction::sigmoid(2.0, 1.0, 0.5));
}

TEST_CASE("stationary options follow the solver") {
    RunConfig c;
    c.solver.dt = 0.01;
    c.solver.splitting_order = 1;
    c.solver.newton_tol = 1e-11;
    const StationaryOptions o = c.stationary_options();
    CHECK(o.dt == 0.01);
    CHECK(o.splitting_order == 1);
    CHECK(o.newton_tol == 1e-11);
}

TEST_CASE("errors name the offending key and line") {
    auto e = parse_error("[grid]\nN = 2\n");
    CHECK(e.key() == "grid.N");
    CHECK(e.line() == 2);

    e = parse_error("[solver]\n\nstepsize = 3\n");
    CHECK(e.key() == "solver.stepsize");
    CHECK(e.line() == 3);

    e = parse_error("[output]\na = 1\n");
    CHECK(e.key() == "output");

    e = parse_error("[solver]\neps = fast\n");
    CHECK(e.key() == "solver.eps");

    e = parse_error("[solver]\neps = -1\n");
    CHECK(e.key() == "solver.eps");

    e = parse_error("[rates]\nF.slope = 1\nF.family = sigmoid\n");
    CHECK(e.key() == "rates.F.slope");

    e = parse_error("[rates]\nK_X.slope = 1\n");
    CHECK(e.key() == "rates.K_X.slope");

    e = parse_error("[experiment]\nshapes = polynomial, star\n");
    CHECK(e.key() == "experiment.shapes");

    e = parse_error("[solver\neps = 1\n");
    CHECK(e.line() == 1);
}

TEST_CASE("dotted overrides use the same validation") {
    RunConfig c;
    set_config_value(c, "solver.eps", "0.02");
    set_config_value(c, "rates.K_Q.amplitude", "0.5");
    set_config_value(c, "experiment.delta_list", "0.001, 0.002");
    set_config_value(c, "paths.out_dir", "elsewhere");
    CHECK(c.solver.eps == 0.02);
    CHECK(c.model.rate(RateId::KQ).amplitude == 0.5);
    CHECK(c.experiment.delta_list == std::vector<double>{0.001, 0.002});
    CHECK(c.out_dir == "elsewhere");
    CHECK_THROWS_AS(set_config_value(c, "grid.N", "1"), ConfigError);
    CHECK_THROWS_AS(set_config_value(c, "eps", "0.1"), ConfigError);
    CHECK_THROWS_AS(set_config_value(c, "solver.nope", "0.1"), ConfigError);
}

TEST_CASE("config hash ignores paths and the horizon") {
    RunConfig a, b;
    b.out_dir = "x";
    b.resume = "y.sph";
    b.solver.t_end = 7.0;
    CHECK(config_hash(a) == config_hash(b));
    b.solver.eps = 0.01;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("files load and report IO errors") {
    const auto path = std::filesystem::temp_directory_path() / "spheroid_cfg_test.ini";
    {
        std::ofstream out(path);
        out << "[solver]\ndt = 0.01\n";
    }
    CHECK(load_config(path.string()).solver.dt == 0.01);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config(path.string()), IoError);
}

TEST_CASE("shortest round-trip formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-12) == "1e-12");
    const double x = 0.1 + 0.2;
    CHECK(std::stod(format_double(x)) == x);
}
