#include "hazrisk/concave_solver.hpp"

#include <cmath>
#include <limits>

#include "hazrisk/errors.hpp"

namespace hazrisk {

ConcaveMaximum maximize_concave_1d(const std::function<double(double)>& score,
                                   const std::function<double(double)>& curvature,
                                   double start, double score_tolerance,
                                   double max_span) {
  ConcaveMaximum out;
  double x = start;
  double s = score(x);
  if (!std::isfinite(s)) throw EstimationError("score is not finite at start");
  if (std::abs(s) <= score_tolerance) {
    out.argmax = x;
    out.score = s;
    return out;
  }

  // Grow a bracket [lo, hi] with score(lo) > 0 > score(hi).
  double lo = x;
  double hi = x;
  double s_lo = s;
  double s_hi = s;
  const double direction = s > 0.0 ? 1.0 : -1.0;
  double step = 1.0;
  for (;;) {
    const double probe = start + direction * step;
    const double sp = score(probe);
    if (direction > 0.0) {
      if (sp <= 0.0) {
        hi = probe;
        s_hi = sp;
        break;
      }
      lo = probe;
      s_lo = sp;
    } else {
      if (sp >= 0.0) {
        lo = probe;
        s_lo = sp;
        break;
      }
      hi = probe;
      s_hi = sp;
    }
    step *= 2.0;
    if (step > max_span) {
      throw DivergenceError("score keeps its sign: likelihood is monotone");
    }
  }
  if (direction > 0.0) {
    x = lo;
    s = s_lo;
  } else {
    x = hi;
    s = s_hi;
  }

  constexpr int kMaxIterations = 200;
  for (int it = 1; it <= kMaxIterations; ++it) {
    out.iterations = it;
    const double c = curvature(x);
    double next = (c < 0.0) ? x - s / c : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double s_next = score(next);
    if (s_next > 0.0) {
      lo = next;
    } else if (s_next < 0.0) {
      hi = next;
    }
    x = next;
    s = s_next;
    if (std::abs(s) <= score_tolerance || s == 0.0) break;
    // Bracket at machine resolution: nothing left to refine.
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(x))) {
      break;
    }
  }
  out.argmax = x;
  out.score = s;
  return out;
}

}  // namespace hazrisk
