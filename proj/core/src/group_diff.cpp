#include "hazrisk/group_diff.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hazrisk/errors.hpp"
#include "hazrisk/grid.hpp"
#include "hazrisk/normal.hpp"
#include "hazrisk/pair_likelihood.hpp"
#include "hazrisk/parallel.hpp"

namespace hazrisk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SurvivalDataset group_subset(const SurvivalDataset& data, int z) {
  try {
    return data.filter_group(z);
  } catch (const InputError&) {
    throw InputError("group " + std::to_string(z) + " is absent from the data");
  }
}

LocalPolyFit fit_group(const SurvivalDataset& subset, double x, int z, int degree,
                       double h1, const KernelSpec& kernel,
                       const LocalFitOptions& options) {
  try {
    return fit_local(subset, x, degree, h1, kernel, options);
  } catch (const EstimationError& e) {
    std::ostringstream msg;
    msg << "first-step fit for group " << z << " at x=" << x << " failed: " << e.what();
    throw EstimationError(msg.str());
  }
}

struct WindowCounts {
  int failures1 = 0;
  int failures2 = 0;
  double censoring = 0.0;
};

WindowCounts window_counts(const SurvivalDataset& data, double x, int z1, int z2,
                           double h, const KernelSpec& kernel) {
  WindowCounts c;
  int in_window = 0;
  int censored = 0;
  for (const auto& s : data.samples()) {
    if (!s.group || (*s.group != z1 && *s.group != z2)) continue;
    if (kernel_weight(kernel, s.x - x, h) <= 0.0) continue;
    ++in_window;
    if (s.status == 0) {
      ++censored;
    } else if (*s.group == z1) {
      ++c.failures1;
    } else {
      ++c.failures2;
    }
  }
  c.censoring = in_window > 0 ? static_cast<double>(censored) / in_window : 0.0;
  return c;
}

double two_sided_z(double level) { return normal_quantile(1.0 - (1.0 - level) / 2.0); }

void finish(GroupDiffEstimate& est, const SurvivalDataset& data,
            const EstimatorConfig& config) {
  est.sigma2_hat = rho_variance(data, est.x, est.z1, est.z2, est.h, config.kernel);
  est.se_hat = std::sqrt(est.sigma2_hat / (static_cast<double>(data.size()) * est.h));
  const double center = est.rho_hat - est.bias_smoothed;
  const double radius = two_sided_z(config.ci_level) * est.se_hat;
  est.ci = {center - radius, center + radius};
  est.converged = true;
}

}  // namespace

GroupFits fit_groups(const SurvivalDataset& data, double x, int z1, int z2,
                     int degree, double h1, const KernelSpec& kernel,
                     const LocalFitOptions& options) {
  const SurvivalDataset d1 = group_subset(data, z1);
  const SurvivalDataset d2 = group_subset(data, z2);
  return {fit_group(d1, x, z1, degree, h1, kernel, options),
          fit_group(d2, x, z2, degree, h1, kernel, options)};
}

double estimate_rho(const SurvivalDataset& data, double x, int z1, int z2,
                    const LocalPolyFit& fit1, const LocalPolyFit& fit2,
                    double h, const KernelSpec& kernel, int p) {
  if (!fit1.converged || !fit2.converged) {
    throw EstimationError("group first-step fits must have converged");
  }
  if (!(h > 0.0)) throw InputError("second-step bandwidth must be positive");
  const PairLikelihood lik(data, group_terms(data, x, z1, z2, fit1, fit2, p, h, kernel));
  return lik.maximize();
}

double rho_bias(const LocalPolyFit& fit1_hi, const LocalPolyFit& fit2_hi,
                int p, double h, const KernelSpec& kernel) {
  if (fit1_hi.degree <= p || fit2_hi.degree <= p) {
    throw InputError("bias plug-in needs first-step fits of degree > p");
  }
  return std::pow(h, p + 1) / std::tgamma(p + 2.0) *
         (fit2_hi.derivative(p + 1) - fit1_hi.derivative(p + 1)) *
         kernel_moment(kernel, p + 1);
}

double rho_variance(const SurvivalDataset& data, double x, int z1, int z2,
                    double h, const KernelSpec& kernel) {
  double m1 = 0.0;
  double m2 = 0.0;
  for (const auto& s : data.samples()) {
    if (s.status != 1 || !s.group) continue;
    const double k = kernel_weight(kernel, s.x - x, h);
    if (*s.group == z1) m1 += k;
    else if (*s.group == z2) m2 += k;
  }
  const double n = static_cast<double>(data.size());
  for (auto [mass, z] : {std::pair{m1, z1}, std::pair{m2, z2}}) {
    if (!(mass > 0.0)) {
      std::ostringstream msg;
      msg << "variance undefined at x=" << x << ": group " << z
          << " has no failures inside the window";
      throw VarianceUndefinedError(msg.str());
    }
  }
  return kernel_square_integral(kernel) * (n / m1 + n / m2);
}

double smooth_bias(std::span<const double> grid, std::span<const double> bias_curve,
                   double x, double h, const KernelSpec& kernel) {
  if (grid.size() != bias_curve.size()) throw InputError("bias grid and values differ in length");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!std::isfinite(bias_curve[g])) continue;
    const double w = kernel_weight(kernel, grid[g] - x, h);
    num += w * bias_curve[g];
    den += w;
  }
  if (!(den > 0.0)) {
    std::ostringstream msg;
    msg << "no bias grid point within the window around x=" << x;
    throw EstimationError(msg.str());
  }
  return num / den;
}

GroupDiffEstimate estimate_group_difference(const SurvivalDataset& data,
                                            double x, int z1, int z2,
                                            const EstimatorConfig& config) {
  config.validate();
  if (x < data.min_x() || x > data.max_x()) {
    std::ostringstream msg;
    msg << "x=" << x << " lies outside the covariate range";
    throw EstimationError(msg.str());
  }
  const SurvivalDataset d1 = group_subset(data, z1);
  const SurvivalDataset d2 = group_subset(data, z2);

  GroupDiffEstimate est;
  est.x = x;
  est.z1 = z1;
  est.z2 = z2;
  est.h = config.second_step_bandwidth(x);
  est.ci_level = config.ci_level;
  const auto counts = window_counts(data, x, z1, z2, est.h, config.kernel);
  est.n1_eff = counts.failures1;
  est.n2_eff = counts.failures2;
  est.window_censoring = counts.censoring;

  const double h1 = config.first_step_bandwidth(x);
  const LocalPolyFit fit1 = fit_group(d1, x, z1, config.p1, h1, config.kernel, config.fit_options);
  const LocalPolyFit fit2 = fit_group(d2, x, z2, config.p1, h1, config.kernel, config.fit_options);
  est.rho_hat = estimate_rho(data, x, z1, z2, fit1, fit2, est.h, config.kernel, config.p);

  if (config.bias_correction) {
    if (config.p1 > config.p) {
      est.bias_hat = rho_bias(fit1, fit2, config.p, est.h, config.kernel);
      est.bias_smoothed = est.bias_hat;
      if (config.smooth_bias) {
        const auto grid = linspace(data.min_x(), data.max_x(), config.pilot_grid_points);
        std::vector<double> raw(grid.size(), kNaN);
        for (std::size_t g = 0; g < grid.size(); ++g) {
          if (kernel_weight(config.kernel, grid[g] - x, est.h) <= 0.0) continue;
          try {
            const double hg = config.first_step_bandwidth(grid[g]);
            const auto f1 = fit_local(d1, grid[g], config.p1, hg, config.kernel, config.fit_options);
            const auto f2 = fit_local(d2, grid[g], config.p1, hg, config.kernel, config.fit_options);
            raw[g] = rho_bias(f1, f2, config.p, config.second_step_bandwidth(grid[g]),
                              config.kernel);
          } catch (const EstimationError&) {
            // skipped in the average
          }
        }
        try {
          est.bias_smoothed = smooth_bias(grid, raw, x, est.h, config.kernel);
        } catch (const EstimationError&) {
          est.bias_smoothed = est.bias_hat;
        }
      }
    } else {
      est.bias_unavailable = true;
    }
  }
  finish(est, data, config);
  return est;
}

std::vector<GroupDiffEstimate> estimate_group_difference_curve(
    const SurvivalDataset& data, std::span<const double> grid, int z1, int z2,
    const EstimatorConfig& config) {
  config.validate();
  if (grid.empty()) throw InputError("grid is empty");
  const SurvivalDataset d1 = group_subset(data, z1);
  const SurvivalDataset d2 = group_subset(data, z2);
  const auto fits1 = fit_derivative_curve(d1, grid, config.p1, config.h1, config.kernel,
                                          config.bandwidth_rule, config.fit_options,
                                          config.threads);
  const auto fits2 = fit_derivative_curve(d2, grid, config.p1, config.h1, config.kernel,
                                          config.bandwidth_rule, config.fit_options,
                                          config.threads);

  std::vector<GroupDiffEstimate> out(grid.size());
  std::vector<double> raw_bias(grid.size(), kNaN);
  parallel_for(grid.size(), config.threads, [&](std::size_t g) {
    GroupDiffEstimate& est = out[g];
    est.x = grid[g];
    est.z1 = z1;
    est.z2 = z2;
    est.h = config.second_step_bandwidth(grid[g]);
    est.ci_level = config.ci_level;
    const auto counts = window_counts(data, est.x, z1, z2, est.h, config.kernel);
    est.n1_eff = counts.failures1;
    est.n2_eff = counts.failures2;
    est.window_censoring = counts.censoring;
    if (!fits1[g].converged || !fits2[g].converged) {
      est.diagnostic = !fits1[g].converged ? "group " + std::to_string(z1) + ": " + fits1[g].diagnostic
                                           : "group " + std::to_string(z2) + ": " + fits2[g].diagnostic;
      est.rho_hat = kNaN;
      return;
    }
    try {
      est.rho_hat = estimate_rho(data, est.x, z1, z2, fits1[g], fits2[g], est.h,
                                 config.kernel, config.p);
    } catch (const EstimationError& e) {
      est.diagnostic = e.what();
      est.rho_hat = kNaN;
      return;
    }
    if (config.bias_correction && config.p1 > config.p) {
      raw_bias[g] = rho_bias(fits1[g], fits2[g], config.p, est.h, config.kernel);
    }
  });

  for (std::size_t g = 0; g < grid.size(); ++g) {
    GroupDiffEstimate& est = out[g];
    if (!std::isfinite(est.rho_hat)) continue;
    if (config.bias_correction) {
      if (config.p1 > config.p) {
        est.bias_hat = raw_bias[g];
        est.bias_smoothed = config.smooth_bias
                                ? smooth_bias(grid, raw_bias, est.x, est.h, config.kernel)
                                : est.bias_hat;
      } else {
        est.bias_unavailable = true;
      }
    }
    try {
      finish(est, data, config);
    } catch (const EstimationError& e) {
      est.diagnostic = e.what();
      est.converged = false;
    }
  }
  return out;
}

}  // namespace hazrisk
