#include "hazrisk/relative_risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hazrisk/errors.hpp"
#include "hazrisk/grid.hpp"
#include "hazrisk/normal.hpp"
#include "hazrisk/pair_likelihood.hpp"
#include "hazrisk/parallel.hpp"

namespace hazrisk {

void EstimatorConfig::validate() const {
  if (p < 1) throw InputError("p must be at least 1");
  if (p1 < p) throw InputError("p1 must be >= p");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw InputError("ci_level must lie in (0, 1)");
  if (pilot_grid_points < 2) throw InputError("pilot grid needs at least 2 points");
  if (bandwidth_rule) {
    bandwidth_rule->validate();
    if (!(h_ratio > 0.0 && h_ratio < 1.0)) {
      throw InputError("h_ratio must lie in (0, 1) so that h < h1");
    }
  } else {
    if (!(h > 0.0) || !(h1 > 0.0)) throw InputError("bandwidths h and h1 must be positive");
    if (!(h < h1)) throw InputError("second-step bandwidth h must be smaller than h1");
  }
}

double EstimatorConfig::first_step_bandwidth(double x) const {
  return bandwidth_rule ? bandwidth_rule->at(x) : h1;
}

double EstimatorConfig::second_step_bandwidth(double x2) const {
  return bandwidth_rule ? h_ratio * bandwidth_rule->at(x2) : h;
}

namespace {

void require_converged(const LocalPolyFit& fit, const char* which) {
  if (!fit.converged) {
    std::ostringstream msg;
    msg << "first-step fit at " << which << "=" << fit.anchor << " failed";
    if (!fit.diagnostic.empty()) msg << ": " << fit.diagnostic;
    throw EstimationError(msg.str());
  }
}

LocalPolyFit fit_with_context(const SurvivalDataset& data, double x,
                              const EstimatorConfig& config, const char* which) {
  try {
    return fit_local(data, x, config.p1, config.first_step_bandwidth(x),
                     config.kernel, config.fit_options);
  } catch (const EstimationError& e) {
    std::ostringstream msg;
    msg << "first-step fit at " << which << "=" << x << " failed: " << e.what();
    throw EstimationError(msg.str());
  }
}

void require_in_range(const SurvivalDataset& data, double x, const char* which) {
  if (x < data.min_x() || x > data.max_x()) {
    std::ostringstream msg;
    msg << which << "=" << x << " lies outside the covariate range ["
        << data.min_x() << ", " << data.max_x() << "]";
    throw EstimationError(msg.str());
  }
}

double two_sided_z(double level) { return normal_quantile(1.0 - (1.0 - level) / 2.0); }

}  // namespace

double estimate_alpha(const SurvivalDataset& data, double x1, double x2,
                      const LocalPolyFit& fit1, const LocalPolyFit& fit2,
                      double h, const KernelSpec& kernel, int p) {
  require_converged(fit1, "x1");
  require_converged(fit2, "x2");
  if (!(h > 0.0)) throw InputError("second-step bandwidth must be positive");
  const PairLikelihood lik(data, relative_risk_terms(data, x1, x2, fit1, fit2, p, h, kernel));
  return lik.maximize();
}

double alpha_bias(const LocalPolyFit& fit1_hi, const LocalPolyFit& fit2_hi,
                  int p, double h, const KernelSpec& kernel) {
  if (fit1_hi.degree <= p || fit2_hi.degree <= p) {
    throw InputError("bias plug-in needs first-step fits of degree > p");
  }
  const double factorial = std::tgamma(p + 2.0);
  return std::pow(h, p + 1) / factorial *
         (fit2_hi.derivative(p + 1) - fit1_hi.derivative(p + 1)) *
         kernel_moment(kernel, p + 1);
}

double alpha_variance(const SurvivalDataset& data, double x1, double x2,
                      double h, const KernelSpec& kernel,
                      std::span<const double> d_hat) {
  const std::size_t n = data.size();
  if (d_hat.size() != n) throw InputError("d_hat needs one value per sample");
  double shift = -std::numeric_limits<double>::infinity();
  for (double d : d_hat) {
    if (!std::isfinite(d)) throw InputError("d_hat must be finite");
    shift = std::max(shift, d);
  }

  // Suffix sums over risk sets of e^D, k1 e^D and k2 e^D.
  std::vector<double> all(n + 1, 0.0);
  std::vector<double> win1(n + 1, 0.0);
  std::vector<double> win2(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    const double e = std::exp(d_hat[i] - shift);
    all[i] = all[i + 1] + e;
    win1[i] = win1[i + 1] + kernel_weight(kernel, data[i].x - x1, h) * e;
    win2[i] = win2[i + 1] + kernel_weight(kernel, data[i].x - x2, h) * e;
  }

  double total = 0.0;
  for (std::size_t start : data.risk_start()) {
    const double a = win1[start];
    const double b = win2[start];
    if (a > 0.0 && b > 0.0) total += a * b / (all[start] * (a + b));
  }
  if (!(total > 0.0)) {
    std::ostringstream msg;
    msg << "variance undefined at (" << x1 << ", " << x2
        << "): no failure has both windows in its risk set";
    throw VarianceUndefinedError(msg.str());
  }
  return kernel_square_integral(kernel) / (total / static_cast<double>(n));
}

std::vector<double> d_hat_from_curve(const SurvivalDataset& data,
                                     std::span<const double> grid,
                                     std::span<const double> alpha) {
  if (grid.size() != alpha.size()) throw InputError("curve grid and values differ in length");
  std::vector<double> knots;
  std::vector<double> values;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (std::isfinite(alpha[g])) {
      knots.push_back(grid[g]);
      values.push_back(alpha[g]);
    }
  }
  if (knots.empty()) throw EstimationError("no usable curve points to build D_i");
  std::vector<double> d(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    d[i] = interpolate_linear(knots, values, data[i].x);
  }
  return d;
}

std::vector<double> anchored_alpha(const SurvivalDataset& data, double anchor,
                                   const LocalPolyFit& anchor_fit,
                                   std::span<const double> grid,
                                   std::span<const LocalPolyFit> grid_fits,
                                   const EstimatorConfig& config) {
  if (grid.size() != grid_fits.size()) throw InputError("one fit per grid point required");
  std::vector<double> alpha(grid.size(), std::numeric_limits<double>::quiet_NaN());
  if (!anchor_fit.converged) return alpha;
  parallel_for(grid.size(), config.threads, [&](std::size_t g) {
    const LocalPolyFit& fit = grid[g] == anchor ? anchor_fit : grid_fits[g];
    if (!fit.converged) return;
    try {
      alpha[g] = estimate_alpha(data, anchor, grid[g], anchor_fit, fit,
                                config.second_step_bandwidth(grid[g]), config.kernel,
                                config.p);
    } catch (const EstimationError&) {
      // left as NaN
    }
  });
  return alpha;
}

std::vector<double> anchored_alpha(const SurvivalDataset& data, double anchor,
                                   std::span<const double> grid,
                                   const EstimatorConfig& config) {
  const LocalPolyFit anchor_fit = fit_with_context(data, anchor, config, "anchor");
  const auto fits = fit_derivative_curve(data, grid, config.p1, config.h1, config.kernel,
                                         config.bandwidth_rule, config.fit_options,
                                         config.threads);
  return anchored_alpha(data, anchor, anchor_fit, grid, fits, config);
}

namespace {

// Bias, variance and CI for a pair whose alpha is already known.
RelativeRiskEstimate complete_estimate(const SurvivalDataset& data, double x1,
                                       double x2, const LocalPolyFit& fit1,
                                       const LocalPolyFit& fit2, double alpha,
                                       const EstimatorConfig& config,
                                       std::span<const double> d_hat) {
  RelativeRiskEstimate est;
  est.x1 = x1;
  est.x2 = x2;
  est.alpha_hat = alpha;
  est.h = config.second_step_bandwidth(x2);
  est.ci_level = config.ci_level;
  if (config.bias_correction) {
    if (config.p1 > config.p) {
      est.bias_hat = alpha_bias(fit1, fit2, config.p, est.h, config.kernel);
    } else {
      est.bias_unavailable = true;
    }
  }
  est.sigma2_hat = alpha_variance(data, x1, x2, est.h, config.kernel, d_hat);
  est.se_hat = std::sqrt(est.sigma2_hat / (static_cast<double>(data.size()) * est.h));
  const double center = est.alpha_hat - est.bias_hat;
  const double radius = two_sided_z(config.ci_level) * est.se_hat;
  est.ci = {center - radius, center + radius};
  est.converged = true;
  return est;
}

}  // namespace

RelativeRiskEstimate estimate_relative_risk(const SurvivalDataset& data,
                                            double x1, double x2,
                                            const EstimatorConfig& config,
                                            std::span<const double> d_hat) {
  config.validate();
  require_in_range(data, x1, "x1");
  require_in_range(data, x2, "x2");
  const LocalPolyFit fit1 = fit_with_context(data, x1, config, "x1");
  const LocalPolyFit fit2 = x2 == x1 ? fit1 : fit_with_context(data, x2, config, "x2");
  const double alpha = estimate_alpha(data, x1, x2, fit1, fit2,
                                      config.second_step_bandwidth(x2), config.kernel,
                                      config.p);

  std::vector<double> pilot;
  if (d_hat.empty()) {
    const auto grid = linspace(data.min_x(), data.max_x(), config.pilot_grid_points);
    const auto fits = fit_derivative_curve(data, grid, config.p1, config.h1, config.kernel,
                                           config.bandwidth_rule, config.fit_options,
                                           config.threads);
    pilot = d_hat_from_curve(data, grid, anchored_alpha(data, x1, fit1, grid, fits, config));
    d_hat = pilot;
  }
  return complete_estimate(data, x1, x2, fit1, fit2, alpha, config, d_hat);
}

RiskCurve estimate_curve(const SurvivalDataset& data, double anchor,
                         std::span<const double> grid,
                         const EstimatorConfig& config) {
  config.validate();
  if (grid.empty()) throw InputError("curve grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) throw InputError("curve grid must be ascending");
  if (anchor < grid.front() || anchor > grid.back()) {
    throw InputError("anchor must lie within the grid range");
  }
  require_in_range(data, anchor, "anchor");

  const LocalPolyFit anchor_fit = fit_with_context(data, anchor, config, "anchor");
  const auto fits = fit_derivative_curve(data, grid, config.p1, config.h1, config.kernel,
                                         config.bandwidth_rule, config.fit_options,
                                         config.threads);
  const auto alpha = anchored_alpha(data, anchor, anchor_fit, grid, fits, config);
  const auto d_hat = d_hat_from_curve(data, grid, alpha);

  RiskCurve curve;
  curve.anchor = anchor;
  curve.grid.assign(grid.begin(), grid.end());
  curve.estimates.resize(grid.size());
  parallel_for(grid.size(), config.threads, [&](std::size_t g) {
    RelativeRiskEstimate& est = curve.estimates[g];
    const LocalPolyFit& fit = grid[g] == anchor ? anchor_fit : fits[g];
    if (std::isfinite(alpha[g])) {
      try {
        est = complete_estimate(data, anchor, grid[g], anchor_fit, fit, alpha[g], config, d_hat);
        return;
      } catch (const EstimationError& e) {
        est.diagnostic = e.what();
      }
    } else if (!fit.converged) {
      est.diagnostic = fit.diagnostic;
    } else {
      est.diagnostic = "second-step likelihood has no finite maximizer";
    }
    est.x1 = anchor;
    est.x2 = grid[g];
    est.alpha_hat = std::numeric_limits<double>::quiet_NaN();
    est.h = config.second_step_bandwidth(grid[g]);
    est.ci_level = config.ci_level;
    est.converged = false;
  });
  return curve;
}

double estimate_alpha_chained(const SurvivalDataset& data, double x1, double x3,
                              double x2, const EstimatorConfig& config) {
  config.validate();
  require_in_range(data, x1, "x1");
  require_in_range(data, x2, "x2");
  require_in_range(data, x3, "x3");
  const LocalPolyFit fit1 = fit_with_context(data, x1, config, "x1");
  const LocalPolyFit fit3 = x3 == x1 ? fit1 : fit_with_context(data, x3, config, "x3");
  const LocalPolyFit fit2 = x2 == x3   ? fit3
                            : x2 == x1 ? fit1
                                       : fit_with_context(data, x2, config, "x2");
  const double first = estimate_alpha(data, x1, x3, fit1, fit3,
                                      config.second_step_bandwidth(x3), config.kernel, config.p);
  const double second = estimate_alpha(data, x3, x2, fit3, fit2,
                                       config.second_step_bandwidth(x2), config.kernel, config.p);
  return first + second;
}

}  // namespace hazrisk
