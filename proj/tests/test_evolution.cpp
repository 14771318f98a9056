#include "spheroid/error.hpp"
#include "spheroid/evolution.hpp"
#include "spheroid/stationary.hpp"

#include <doctest.h>

#include <cmath>

using namespace spheroid;

namespace {

StationarySolution fake_stationary(const State& s) {
    StationarySolution st;
    st.z = s.z;
    st.grid = s.grid;
    st.c = s.c;
    st.p = s.p;
    st.v.assign(s.c.size(), 0.0);
    return st;
}

State uniform_state(int n, double z, double c, double p) {
    return State{0.0, z, Grid(n), std::vector<double>(n, c), std::vector<double>(n, p)};
}

// F = 0 keeps c = 1; with only K_B = b c the fraction is logistic and
// uniform, v = b p r / 3, w = 0 and z' = b p / 3.
const double kB = 0.6;
const RateModel kLogistic = RateModel::zero_model().with_rate(RateId::KB, RateFunction::linear(kB));

double logistic_p(double p0, double t) { return p0 * std::exp(kB * t) / (1 - p0 + p0 * std::exp(kB * t)); }
double logistic_z(double z0, double p0, double t) { return z0 + std::log(1 - p0 + p0 * std::exp(kB * t)) / 3; }

double logistic_error(double dt, double eps) {
    const State init = uniform_state(21, 0.2, 1.0, 0.3);
    SolverConfig cfg;
    cfg.eps = eps;
    cfg.dt = dt;
    cfg.t_end = 2.0;
    cfg.grid = init.grid;
    const auto res = simulate(kLogistic, init, cfg, fake_stationary(init));
    double err = std::abs(res.final_state.z - logistic_z(0.2, 0.3, 2.0));
    for (double p : res.final_state.p) err = std::max(err, std::abs(p - logistic_p(0.3, 2.0)));
    return err;
}

} // namespace

TEST_CASE("velocity of a uniform source is linear in r") {
    const State s = uniform_state(41, 0.0, 1.0, 1.0);
    const VelocityField vel = velocity_from_state(kLogistic, s);
    CHECK(vel.v1 == doctest::Approx(kB / 3));
    for (int i = 0; i < s.grid.size(); ++i) {
        CHECK(vel.v[i] == doctest::Approx(kB * s.grid.r(i) / 3));
        CHECK(std::abs(vel.w[i]) < 1e-15);
    }
}

TEST_CASE("uniform logistic growth matches the scalar ODE solution at second order in dt") {
    for (double eps : {0.0, 0.1}) {
        const double e1 = logistic_error(0.1, eps), e2 = logistic_error(0.05, eps);
        CHECK(e1 < 1e-4);
        CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.15));
    }
}

TEST_CASE("first-order splitting converges") {
    const State init = uniform_state(21, 0.2, 1.0, 0.3);
    SolverConfig cfg;
    cfg.splitting_order = 1;
    cfg.t_end = 2.0;
    cfg.grid = init.grid;
    double prev = 0.0;
    for (double dt : {0.1, 0.05}) {
        cfg.dt = dt;
        const auto res = simulate(kLogistic, init, cfg, fake_stationary(init));
        const double err = std::abs(res.final_state.z - logistic_z(0.2, 0.3, 2.0));
        CHECK(err < 1e-3);
        if (prev > 0.0) CHECK(std::log2(prev / err) > 0.9);
        prev = err;
    }
}

TEST_CASE("transport follows exact characteristics") {
    // w = -a r (1 - r) has the explicit flow r / (1 - r) -> r / (1 - r) e^{-a t}.
    const double a = 0.8, dt = 0.05, T = 1.0;
    auto exact = [&](double x) {
        const double q = x / (1 - x) * std::exp(a * T);
        const double xi = x == 1.0 ? 1.0 : q / (1 + q);
        return 0.5 + 0.3 * std::cos(M_PI * xi);
    };
    double prev = 0.0;
    for (int n : {41, 81, 161}) {
        State s = uniform_state(n, 0.0, 1.0, 0.0);
        for (int i = 0; i < n; ++i) s.p[i] = 0.5 + 0.3 * std::cos(M_PI * s.grid.r(i));
        VelocityField vel;
        vel.v.assign(n, 0.0);
        vel.w.resize(n);
        for (int i = 0; i < n; ++i) vel.w[i] = -a * s.grid.r(i) * (1 - s.grid.r(i));
        for (int k = 0; k < std::lround(T / dt); ++k)
            s.p = transport_step(RateModel::zero_model(), s, vel, dt, Interpolation::Pchip);
        double err = 0.0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(s.p[i] - exact(s.grid.r(i))));
        CHECK(err < 2e-3);
        if (prev > 0.0) CHECK(std::log2(prev / err) > 1.5);
        prev = err;
    }
}

TEST_CASE("transport with zero velocity integrates the reaction ODE") {
    // Only K_P = k c: f = K_P (1 - p), g = 0.
    const RateModel model = RateModel::zero_model().with_rate(RateId::KP, RateFunction::linear(2.0));
    State s = uniform_state(11, 0.0, 0.5, 0.1);
    VelocityField vel;
    vel.v.assign(11, 0.0);
    vel.w.assign(11, 0.0);
    // Heun's global error for p' = k (1 - p) is about (k dt)^2 k t / 6 relative to 1 - p.
    const double dt = 0.01, exact = 1.0 - 0.9 * std::exp(-1.0);
    for (int k = 0; k < 100; ++k) s.p = transport_step(model, s, vel, dt);
    for (double p : s.p) CHECK(std::abs(p - exact) < 1e-5);
}

TEST_CASE("nutrient diffusion matches the separable solution") {
    // Zero rates, z = 0, eps = 1: c_t = c'' + 2 c' / r, solved by
    // 1 + A e^{-pi^2 t} sin(pi r) / (pi r).
    const double A = 0.3, T = 0.1;
    auto mode = [](double r) { return r == 0.0 ? 1.0 : std::sin(M_PI * r) / (M_PI * r); };
    double prev = 0.0;
    for (int n : {41, 81, 161}) {
        State init = uniform_state(n, 0.0, 1.0, 0.5);
        for (int i = 0; i < n; ++i) init.c[i] = 1.0 - A * mode(init.grid.r(i));
        SolverConfig cfg;
        cfg.eps = 1.0;
        cfg.dt = 0.000625;  // time error well below the spatial one
        cfg.t_end = T;
        cfg.grid = init.grid;
        const auto res = simulate(RateModel::zero_model(), init, cfg, fake_stationary(init));
        double err = 0.0;
        for (int i = 0; i < n; ++i)
            err = std::max(err, std::abs(res.final_state.c[i] -
                                         (1.0 - A * std::exp(-M_PI * M_PI * T) * mode(init.grid.r(i)))));
        CHECK(err < 1e-3);
        if (prev > 0.0) CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.15));
        prev = err;
    }
}

TEST_CASE("nutrient_step requires eps > 0") {
    const State s = uniform_state(11, 0.0, 1.0, 0.5);
    const VelocityField vel = velocity_from_state(RateModel::zero_model(), s);
    CHECK_THROWS_AS(nutrient_step(RateModel::zero_model(), s, vel, 0.1, 0.0), DomainError);
    const auto c = nutrient_step(RateModel::zero_model(), s, vel, 0.1, 0.5);
    for (double x : c) CHECK(x == doctest::Approx(1.0));
}

TEST_CASE("quasi-static update returns m(z)") {
    const RateModel model = RateModel::default_model();
    State s = uniform_state(51, 0.9, 1.0, 0.5);
    CHECK(quasi_static_update(model, s) == solve_m_values(model, 0.9, s.grid));
}

TEST_CASE("Heun step integrates z' = -z with third-order local error") {
    auto rhs = [](double, double z) { return -z; };
    const double z1 = boundary_radius_step(1.0, 0.0, 0.1, rhs);
    CHECK(z1 == doctest::Approx(1.0 - 0.1 + 0.005));
}

TEST_CASE("stepping the stationary state leaves it in place") {
    const RateModel model = RateModel::default_model();
    const StationarySolution st = solve_stationary(model, Grid(101));
    SolverConfig cfg;
    cfg.grid = Grid(101);
    const State next = step(model, st.as_state(), cfg);
    CHECK(std::abs(next.z - st.z) < 1e-8);
    CHECK(max_abs_diff(next.p, st.p) < 1e-8);
    CHECK(max_abs_diff(next.c, st.c) < 1e-8);
}

TEST_CASE("simulate records, hooks and early stop") {
    const RateModel model = RateModel::default_model();
    const StationarySolution st = solve_stationary(model, Grid(51));
    State init = st.as_state();
    init.z += 0.01;
    SolverConfig cfg;
    cfg.grid = Grid(51);
    cfg.t_end = 5.0;
    cfg.output_every = 4;
    cfg.snapshot_every = 10;
    int records = 0, snapshots = 0;
    SimulationHooks hooks;
    hooks.on_record = [&](const TimeRecord&, const State&) { ++records; };
    hooks.on_snapshot = [&](const State&) { ++snapshots; };
    const auto res = simulate(model, init, cfg, st, hooks);
    CHECK(res.series.size() == 51);
    CHECK(records == 51);
    CHECK(snapshots == 6);  // every 40 steps plus the final one
    CHECK(res.series.front().t == 0.0);
    CHECK(res.series.back().t == doctest::Approx(5.0));
    CHECK(res.final_state.t == doctest::Approx(5.0));
    CHECK(res.admissible);
    for (const auto& r : res.series) CHECK(r.deviation.eta < 1e-8);

    cfg.t_end = 40.0;
    cfg.early_stop_floor = 1e-3;
    const auto early = simulate(model, init, cfg, st);
    CHECK(early.early_stopped);
    CHECK(early.final_state.t < 40.0);
}

TEST_CASE("identical runs are bit-identical") {
    const RateModel model = RateModel::default_model();
    const StationarySolution st = solve_stationary(model, Grid(51));
    State init = st.as_state();
    for (double& p : init.p) p *= 0.99;
    SolverConfig cfg;
    cfg.grid = Grid(51);
    cfg.eps = 0.05;
    cfg.t_end = 2.0;
    const auto a = simulate(model, init, cfg, st);
    const auto b = simulate(model, init, cfg, st);
    CHECK(a.final_state == b.final_state);
    CHECK(a.series.size() == b.series.size());
}

TEST_CASE("inadmissible data is run but flagged") {
    const RateModel model = RateModel::default_model();
    const StationarySolution st = solve_stationary(model, Grid(51));
    State init = st.as_state();
    init.c.back() = 0.9;
    SolverConfig cfg;
    cfg.grid = Grid(51);
    cfg.eps = 0.05;
    cfg.t_end = 0.1;
    const auto res = simulate(model, init, cfg, st);
    CHECK_FALSE(res.admissible);
    CHECK(res.warnings.size() == 1);
    CHECK(res.final_state.c.back() == 1.0);
}

TEST_CASE("mismatched grids and bad configurations are rejected") {
    const RateModel model = RateModel::default_model();
    const State s = uniform_state(21, 0.0, 1.0, 0.5);
    SolverConfig cfg;
    cfg.grid = Grid(31);
    CHECK_THROWS_AS(simulate(model, s, cfg, fake_stationary(s)), DomainError);
    cfg.grid = Grid(21);
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.dt = 0.1;
    cfg.splitting_order = 3;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    CHECK(interpolation_from_name(interpolation_name(Interpolation::Linear)) == Interpolation::Linear);
    CHECK_THROWS_AS(interpolation_from_name("spline"), DomainError);
}

TEST_CASE("clip log counts events beyond a tolerance") {
    ClipLog log;
    log.events = {{0.0, 'p', 3, 1.0 + 1e-12}, {0.1, 'c', 1, -1e-6}};
    CHECK(log.beyond(1e-10) == 1);
    CHECK(log.beyond(1e-5) == 0);
}
