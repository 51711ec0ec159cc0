#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hazrisk/config.hpp"
#include "hazrisk/local_fit.hpp"
#include "hazrisk/survival.hpp"

namespace hazrisk {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return lo <= v && v <= hi; }
};

struct RelativeRiskEstimate {
  double x1 = 0.0;
  double x2 = 0.0;
  double alpha_hat = 0.0;
  double bias_hat = 0.0;
  double sigma2_hat = 0.0;
  double se_hat = 0.0;  // sqrt(sigma2_hat / (n h))
  double ci_level = 0.95;
  Interval ci;
  double h = 0.0;
  bool converged = false;
  bool bias_unavailable = false;  // bias requested but p1 == p
  std::string diagnostic;
};

struct RiskCurve {
  double anchor = 0.0;
  std::vector<double> grid;
  std::vector<RelativeRiskEstimate> estimates;
};

// Second-step maximizer of the two-window likelihood given first-step fits
// at x1 and x2; the first p coefficients of each fit are plugged in.
double estimate_alpha(const SurvivalDataset& data, double x1, double x2,
                      const LocalPolyFit& fit1, const LocalPolyFit& fit2,
                      double h, const KernelSpec& kernel, int p = 1);

// h^{p+1} (beta_{p+1}(x2) - beta_{p+1}(x1)) int u^{p+1} K, i.e. the leading
// bias with psi^{(p+1)} = (p+1)! beta_{p+1}. Throws InputError when a fit
// has degree <= p.
double alpha_bias(const LocalPolyFit& fit1_hi, const LocalPolyFit& fit2_hi,
                  int p, double h, const KernelSpec& kernel);

// Plug-in asymptotic variance sigma^2(x1, x2) with d_hat[i] estimating
// psi(X_i) - psi(x1) (dataset order). Throws VarianceUndefinedError when no
// failure's risk set sees both windows.
double alpha_variance(const SurvivalDataset& data, double x1, double x2,
                      double h, const KernelSpec& kernel,
                      std::span<const double> d_hat);

// D_i by linear interpolation of an anchored curve, clamped at the ends.
// Non-finite curve values are skipped.
std::vector<double> d_hat_from_curve(const SurvivalDataset& data,
                                     std::span<const double> grid,
                                     std::span<const double> alpha);

// Full two-step estimate with bias, variance and confidence interval. When
// d_hat is empty a 101-point pilot curve anchored at x1 supplies it.
RelativeRiskEstimate estimate_relative_risk(
    const SurvivalDataset& data, double x1, double x2,
    const EstimatorConfig& config, std::span<const double> d_hat = {});

// Point estimates alpha(x1, g) over a grid; failed points are NaN. The
// anchor fit is computed once.
std::vector<double> anchored_alpha(const SurvivalDataset& data, double anchor,
                                   std::span<const double> grid,
                                   const EstimatorConfig& config);

// Same, from precomputed first-step fits at the grid points and the anchor.
std::vector<double> anchored_alpha(const SurvivalDataset& data, double anchor,
                                   const LocalPolyFit& anchor_fit,
                                   std::span<const double> grid,
                                   std::span<const LocalPolyFit> grid_fits,
                                   const EstimatorConfig& config);

// Curve of estimates against an anchor; D_i for the variances comes from
// the curve itself. Failed points carry converged = false.
RiskCurve estimate_curve(const SurvivalDataset& data, double anchor,
                         std::span<const double> grid,
                         const EstimatorConfig& config);

// alpha(x1, x3) + alpha(x3, x2).
double estimate_alpha_chained(const SurvivalDataset& data, double x1, double x3,
                              double x2, const EstimatorConfig& config);

}  // namespace hazrisk
