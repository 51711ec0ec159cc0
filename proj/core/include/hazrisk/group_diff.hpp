#pragma once

#include <span>
#include <string>
#include <vector>

#include "hazrisk/config.hpp"
#include "hazrisk/local_fit.hpp"
#include "hazrisk/relative_risk.hpp"
#include "hazrisk/survival.hpp"

namespace hazrisk {

// Estimate of rho(x) = psi(x, z2) - psi(x, z1). Only the difference is ever
// reported; per-group levels are not identifiable.
struct GroupDiffEstimate {
  double x = 0.0;
  int z1 = 0;
  int z2 = 1;
  double rho_hat = 0.0;
  double bias_hat = 0.0;
  double bias_smoothed = 0.0;
  double sigma2_hat = 0.0;
  double se_hat = 0.0;  // sqrt(sigma2_hat / (n h))
  double ci_level = 0.95;
  Interval ci;          // centred at rho_hat - bias_smoothed
  double h = 0.0;
  int n1_eff = 0;       // failures with positive window weight, group z1
  int n2_eff = 0;
  double window_censoring = 0.0;  // censored share among windowed samples
  bool converged = false;
  bool bias_unavailable = false;
  std::string diagnostic;
};

// First-step fits for both groups at x, each on its own group's data.
struct GroupFits {
  LocalPolyFit fit1;
  LocalPolyFit fit2;
};

GroupFits fit_groups(const SurvivalDataset& data, double x, int z1, int z2,
                     int degree, double h1, const KernelSpec& kernel,
                     const LocalFitOptions& options = {});

double estimate_rho(const SurvivalDataset& data, double x, int z1, int z2,
                    const LocalPolyFit& fit1, const LocalPolyFit& fit2,
                    double h, const KernelSpec& kernel, int p = 1);

double rho_bias(const LocalPolyFit& fit1_hi, const LocalPolyFit& fit2_hi,
                int p, double h, const KernelSpec& kernel);

// int K^2 * (1 / m1 + 1 / m2), m_k = n^{-1} sum_i 1{Z_i = z_k} delta_i K_h(X_i - x).
// Throws VarianceUndefinedError naming the group whose m_k is zero.
double rho_variance(const SurvivalDataset& data, double x, int z1, int z2,
                    double h, const KernelSpec& kernel);

// sum_g b(y_g) K_h(y_g - x) / sum_g K_h(y_g - x) over the grid. Throws
// EstimationError when no grid point carries weight.
double smooth_bias(std::span<const double> grid,
                   std::span<const double> bias_curve, double x, double h,
                   const KernelSpec& kernel);

// Point estimate with bias, variance and CI. With smooth_bias set, the raw
// bias is evaluated on the 101-point grid over the data range and smoothed
// around x.
GroupDiffEstimate estimate_group_difference(const SurvivalDataset& data,
                                            double x, int z1, int z2,
                                            const EstimatorConfig& config);

// Pointwise estimates over a grid; the smoothed bias uses the raw bias
// evaluated on the same grid. Failed points carry converged = false.
std::vector<GroupDiffEstimate> estimate_group_difference_curve(
    const SurvivalDataset& data, std::span<const double> grid, int z1, int z2,
    const EstimatorConfig& config);

}  // namespace hazrisk
