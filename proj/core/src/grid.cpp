#include "hazrisk/grid.hpp"

#include <algorithm>

#include "hazrisk/errors.hpp"

namespace hazrisk {

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw InputError("grid needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(count));
  // One rounding per point, so symmetric and decimal grid points are exact.
  const double m = count - 1;
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = (lo * (m - i) + hi * i) / m;
  }
  out.back() = hi;
  return out;
}

double interpolate_linear(std::span<const double> knots,
                          std::span<const double> values, double x) {
  if (knots.empty() || knots.size() != values.size()) {
    throw InputError("interpolation needs matching, nonempty knots and values");
  }
  if (x <= knots.front()) return values.front();
  if (x >= knots.back()) return values.back();
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - knots.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - knots[lo]) / (knots[hi] - knots[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

}  // namespace hazrisk
