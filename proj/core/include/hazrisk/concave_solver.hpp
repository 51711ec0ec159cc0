#pragma once

#include <functional>

namespace hazrisk {

struct ConcaveMaximum {
  double argmax = 0.0;
  double score = 0.0;  // derivative at argmax
  int iterations = 0;
};

// Maximizes a smooth concave function of one variable given its derivative
// (score, nonincreasing) and second derivative. Newton steps are kept inside
// a sign-change bracket, falling back to bisection when a step leaves it.
// The bracket is grown geometrically from `start`; if the score keeps its
// sign out to |x - start| > max_span the maximum is taken to be at infinity
// and DivergenceError is thrown.
ConcaveMaximum maximize_concave_1d(const std::function<double(double)>& score,
                                   const std::function<double(double)>& curvature,
                                   double start, double score_tolerance,
                                   double max_span = 1.0e3);

}  // namespace hazrisk
