#pragma once

#include "spheroid/grid.hpp"

#include <cmath>
#include <vector>

namespace spheroid {

// Rescaled fields on the unit grid. R = e^z is the tumor radius; the quiescent
// fraction is 1 - p.
struct State {
    double t = 0.0;
    double z = 0.0;
    Grid grid{3};
    std::vector<double> c;
    std::vector<double> p;

    double radius() const { return std::exp(z); }
    bool operator==(const State&) const = default;
};

} // namespace spheroid
