#pragma once

#include "spheroid/grid.hpp"

// pchip.hpp calls isnan unqualified.
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>

#include <optional>
#include <span>
#include <vector>

namespace spheroid {

// Interpolant of nodal values on the uniform grid: piecewise linear, or the
// monotonicity-preserving piecewise cubic Hermite (PCHIP) with a zero slope at
// the symmetric origin and a limited three-point slope at r = 1.
class FieldInterpolant {
public:
    enum class Kind { Pchip, Linear };

    FieldInterpolant(const Grid& grid, std::span<const double> values, Kind kind);

    double operator()(double r) const;

private:
    Grid grid_;
    std::vector<double> values_;
    std::optional<boost::math::interpolators::pchip<std::vector<double>>> pchip_;
};

} // namespace spheroid
