#pragma once

#include <span>
#include <vector>

namespace spheroid {

// Uniform nodes r_i = i h on [0, 1], h = 1 / (N - 1).
class Grid {
public:
    explicit Grid(int n = 101);

    int size() const { return n_; }
    double spacing() const { return h_; }
    // Exact at both ends: r(0) == 0, r(N-1) == 1.
    double r(int i) const { return i == n_ - 1 ? 1.0 : i * h_; }
    std::vector<double> nodes() const;

    bool operator==(const Grid& other) const { return n_ == other.n_; }

private:
    int n_;
    double h_;
};

// Cumulative integrals I_i = int_0^{r_i} u(rho) rho^2 drho, with u replaced by
// its piecewise-linear interpolant and the rho^2 weight integrated exactly.
// Exact for u affine on each cell, and O(h^2) accurate uniformly in r after
// division by r^2.
std::vector<double> weighted_cumulative_integral(const Grid& grid, std::span<const double> u);

enum class OriginDerivative {
    Symmetric,  // u'(0) = 0, as for radially symmetric fields
    OneSided    // second-order forward difference
};

// Second-order first derivative: central in the interior, three-point one-sided
// at r = 1, and at r = 0 according to `origin`.
std::vector<double> derivative(const Grid& grid, std::span<const double> u,
                               OriginDerivative origin = OriginDerivative::Symmetric);

// Second derivative: central in the interior, 2(u_1 - u_0)/h^2 at the symmetric
// origin and a four-point second-order one-sided stencil at r = 1.
std::vector<double> second_derivative(const Grid& grid, std::span<const double> u);

double max_abs(std::span<const double> u);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

// Solves the tridiagonal system lower_i x_{i-1} + diag_i x_i + upper_i x_{i+1} = rhs_i
// in place (rhs becomes the solution). lower[0] and upper[n-1] are ignored.
// Throws NumericError when the matrix is singular.
void solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                       std::vector<double> upper, std::vector<double>& rhs);

} // namespace spheroid
