#pragma once

#include <optional>

#include "hazrisk/bandwidth.hpp"
#include "hazrisk/kernels.hpp"
#include "hazrisk/local_fit.hpp"

namespace hazrisk {

// Settings shared by the relative-risk and group-difference estimators.
struct EstimatorConfig {
  int p = 1;           // degree of the polynomial plugged into the second step
  int p1 = 2;          // first-step degree; p1 > p enables bias correction
  double h = 0.2;      // second-step bandwidth
  double h1 = 0.25;    // first-step bandwidth
  KernelSpec kernel;
  double ci_level = 0.95;
  bool bias_correction = true;
  bool smooth_bias = true;  // group difference only

  // When set, overrides h1 and h pointwise: the first-step bandwidth at x is
  // rule.at(x) and the second-step bandwidth for the pair (x1, x2) is
  // h_ratio * rule.at(x2).
  std::optional<VariableBandwidthRule> bandwidth_rule;
  double h_ratio = 0.8;

  // Points of the pilot curve used to build D_i for the variance.
  int pilot_grid_points = 101;

  LocalFitOptions fit_options;
  unsigned threads = 0;  // 0 = default_thread_count()

  // Throws InputError unless h > 0, h1 > 0, 0 < ci_level < 1, p >= 1,
  // p1 >= p and h < h1.
  void validate() const;

  double first_step_bandwidth(double x) const;
  double second_step_bandwidth(double x2) const;
};

}  // namespace hazrisk
