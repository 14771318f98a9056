#include "spheroid/interpolation.hpp"

#include <algorithm>
#include <cmath>

namespace spheroid {

namespace {

double limited_end_slope(double d_end, double d_next) {
    const double s = 0.5 * (3.0 * d_end - d_next);
    if (s * d_end <= 0.0) return 0.0;
    if (d_end * d_next < 0.0 && std::abs(s) > 3.0 * std::abs(d_end)) return 3.0 * d_end;
    return s;
}

} // namespace

FieldInterpolant::FieldInterpolant(const Grid& grid, std::span<const double> values, Kind kind)
    : grid_(grid), values_(values.begin(), values.end()) {
    if (kind == Kind::Pchip && grid.size() >= 4) {
        const int n = grid.size();
        const double h = grid.spacing();
        const double d_end = (values_[n - 1] - values_[n - 2]) / h;
        const double d_next = (values_[n - 2] - values_[n - 3]) / h;
        pchip_.emplace(grid.nodes(), std::vector<double>(values_), 0.0,
                       limited_end_slope(d_end, d_next));
    }
}

double FieldInterpolant::operator()(double r) const {
    if (pchip_) return (*pchip_)(r);
    const int n = grid_.size();
    const double s = std::clamp(r / grid_.spacing(), 0.0, static_cast<double>(n - 1));
    const int i = std::min(static_cast<int>(s), n - 2);
    const double t = s - i;
    return (1.0 - t) * values_[i] + t * values_[i + 1];
}

} // namespace spheroid
