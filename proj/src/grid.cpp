#include "spheroid/grid.hpp"

#include "spheroid/error.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace spheroid {

Grid::Grid(int n) : n_(n), h_(n >= 3 ? 1.0 / (n - 1) : 0.0) {
    if (n < 3) throw DomainError("grid needs N >= 3 nodes, got " + std::to_string(n));
}

std::vector<double> Grid::nodes() const {
    std::vector<double> r(n_);
    for (int i = 0; i < n_; ++i) r[i] = this->r(i);
    return r;
}

std::vector<double> weighted_cumulative_integral(const Grid& grid, std::span<const double> u) {
    const int n = grid.size();
    std::vector<double> out(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) {
        const double a = grid.r(i);
        const double b = grid.r(i + 1);
        const double h = b - a;
        const double m2 = (b * b * b - a * a * a) / 3.0;
        const double m3 = (b * b * b * b - a * a * a * a) / 4.0;
        const double wa = (b * m2 - m3) / h;
        const double wb = (m3 - a * m2) / h;
        out[i + 1] = out[i] + wa * u[i] + wb * u[i + 1];
    }
    return out;
}

std::vector<double> derivative(const Grid& grid, std::span<const double> u,
                               OriginDerivative origin) {
    const int n = grid.size();
    const double h = grid.spacing();
    std::vector<double> d(n);
    d[0] = origin == OriginDerivative::Symmetric
               ? 0.0
               : (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    for (int i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
    return d;
}

std::vector<double> second_derivative(const Grid& grid, std::span<const double> u) {
    const int n = grid.size();
    const double h2 = grid.spacing() * grid.spacing();
    std::vector<double> d(n);
    d[0] = 2.0 * (u[1] - u[0]) / h2;
    for (int i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
    if (n >= 4)
        d[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / h2;
    else
        d[n - 1] = d[n - 2];
    return d;
}

double max_abs(std::span<const double> u) {
    double m = 0.0;
    for (double x : u) m = std::max(m, std::abs(x));
    return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                       std::vector<double> upper, std::vector<double>& rhs) {
    const auto n = static_cast<lapack_int>(diag.size());
    if (n == 1) {
        if (diag[0] == 0.0) throw NumericError("singular 1x1 system");
        rhs[0] /= diag[0];
        return;
    }
    // dgtsv wants the sub- and super-diagonals as length n-1 arrays.
    const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, 1, lower.data() + 1, diag.data(),
                                          upper.data(), rhs.data(), n);
    if (info != 0)
        throw NumericError("tridiagonal solve failed (LAPACK info " + std::to_string(info) + ")");
}

} // namespace spheroid
