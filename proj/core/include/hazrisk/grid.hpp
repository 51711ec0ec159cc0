#pragma once

#include <span>
#include <vector>

namespace hazrisk {

// `count` equally spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);

// Linear interpolation through (knots, values); knots ascending. Queries
// outside the knot range clamp to the nearest end value.
double interpolate_linear(std::span<const double> knots,
                          std::span<const double> values, double x);

}  // namespace hazrisk
