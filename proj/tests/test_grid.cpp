#include "spheroid/error.hpp"
#include "spheroid/grid.hpp"
#include "spheroid/interpolation.hpp"

#include <doctest.h>

#include <cmath>

using namespace spheroid;

TEST_CASE("grid nodes are uniform with exact endpoints") {
    const Grid g(11);
    CHECK(g.size() == 11);
    CHECK(g.spacing() == doctest::Approx(0.1));
    CHECK(g.r(0) == 0.0);
    CHECK(g.r(10) == 1.0);
    const auto r = g.nodes();
    CHECK(r.size() == 11);
    CHECK(r[3] == doctest::Approx(0.3));
    CHECK_THROWS_AS(Grid(2), DomainError);
}

TEST_CASE("weighted cumulative integral is exact for affine data") {
    const Grid g(21);
    std::vector<double> u;
    for (double r : g.nodes()) u.push_back(2.0 - 3.0 * r);
    const auto I = weighted_cumulative_integral(g, u);
    for (int i = 0; i < g.size(); ++i) {
        const double r = g.r(i);
        CHECK(I[i] == doctest::Approx(2.0 * r * r * r / 3.0 - 0.75 * r * r * r * r).epsilon(1e-13));
    }
}

TEST_CASE("weighted cumulative integral is second order for smooth data") {
    double prev = 0.0;
    for (int n : {41, 81, 161}) {
        const Grid g(n);
        std::vector<double> u;
        for (double r : g.nodes()) u.push_back(std::cos(r));
        const auto I = weighted_cumulative_integral(g, u);
        // int_0^1 cos(r) r^2 dr = 2 cos 1 - sin 1
        const double err = std::abs(I.back() - (2.0 * std::cos(1.0) - std::sin(1.0)));
        if (prev > 0.0) CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.05));
        prev = err;
    }
}

TEST_CASE("derivative stencils are exact for quadratics") {
    const Grid g(17);
    std::vector<double> u;
    for (double r : g.nodes()) u.push_back(1.0 + 0.5 * r + 2.0 * r * r);
    const auto d = derivative(g, u, OriginDerivative::OneSided);
    const auto d2 = second_derivative(g, u);
    for (int i = 0; i < g.size(); ++i) {
        CHECK(d[i] == doctest::Approx(0.5 + 4.0 * g.r(i)));
        if (i > 0) CHECK(d2[i] == doctest::Approx(4.0));
    }
    // Symmetric origin forces u'(0) = 0.
    CHECK(derivative(g, u, OriginDerivative::Symmetric)[0] == 0.0);
}

TEST_CASE("tridiagonal solve agrees with a hand-checked system") {
    // [2 -1 0; -1 2 -1; 0 -1 2] x = [1 0 1]  ->  x = [1 1 1]
    std::vector<double> rhs{1.0, 0.0, 1.0};
    solve_tridiagonal({0.0, -1.0, -1.0}, {2.0, 2.0, 2.0}, {-1.0, -1.0, 0.0}, rhs);
    for (double x : rhs) CHECK(x == doctest::Approx(1.0));
    std::vector<double> zero{1.0, 1.0};
    CHECK_THROWS_AS(solve_tridiagonal({0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, zero), NumericError);
}

TEST_CASE("max norms") {
    const std::vector<double> a{1.0, -3.0, 2.0}, b{1.0, -1.0, 2.5};
    CHECK(max_abs(a) == 3.0);
    CHECK(max_abs_diff(a, b) == 2.0);
}

TEST_CASE("interpolants reproduce nodes and linear data") {
    const Grid g(11);
    std::vector<double> lin, smooth;
    for (double r : g.nodes()) {
        lin.push_back(0.2 + 0.7 * r);
        smooth.push_back(std::cos(M_PI * r / 2));
    }
    for (auto kind : {FieldInterpolant::Kind::Linear, FieldInterpolant::Kind::Pchip}) {
        const FieldInterpolant f(g, smooth, kind);
        for (int i = 0; i < g.size(); ++i) CHECK(f(g.r(i)) == doctest::Approx(smooth[i]).epsilon(1e-14));
    }
    const FieldInterpolant exact(g, lin, FieldInterpolant::Kind::Linear);
    CHECK(exact(0.37) == doctest::Approx(0.2 + 0.7 * 0.37));
}

TEST_CASE("pchip is monotone and more accurate than linear on smooth data") {
    const Grid g(21);
    std::vector<double> u;
    for (double r : g.nodes()) u.push_back(std::cos(M_PI * r / 2));
    const FieldInterpolant pc(g, u, FieldInterpolant::Kind::Pchip);
    const FieldInterpolant li(g, u, FieldInterpolant::Kind::Linear);
    double err_p = 0.0, err_l = 0.0, prev = pc(0.0);
    for (int k = 1; k <= 1000; ++k) {
        const double r = k / 1000.0;
        const double exact = std::cos(M_PI * r / 2);
        err_p = std::max(err_p, std::abs(pc(r) - exact));
        err_l = std::max(err_l, std::abs(li(r) - exact));
        CHECK(pc(r) <= prev + 1e-15);
        prev = pc(r);
    }
    CHECK(err_p < err_l);
}
