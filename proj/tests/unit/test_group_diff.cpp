#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "hazrisk/errors.hpp"
#include "hazrisk/grid.hpp"
#include "hazrisk/group_diff.hpp"
#include "oracles.hpp"

using namespace hazrisk;

namespace {

LocalPolyFit fit_with(double x, std::vector<double> beta) {
  LocalPolyFit f;
  f.anchor = x;
  f.degree = static_cast<int>(beta.size());
  f.beta_star = std::move(beta);
  f.converged = true;
  return f;
}

fixture::Options two_groups(int n, double effect) {
  fixture::Options o;
  o.n = n;
  o.groups = true;
  o.group_effect = effect;
  return o;
}

}  // namespace

TEST_CASE("group bias plug-in") {
  const auto f1 = fit_with(0.0, {0.0, -1.0});
  const auto f2 = fit_with(0.0, {0.0, 1.0});
  CHECK(rho_bias(f1, f2, 1, 0.5, KernelSpec{}) == doctest::Approx(0.1));
  CHECK(rho_bias(f1, f2, 1, 0.25, KernelSpec{}) == doctest::Approx(0.025));
  CHECK(rho_bias(f1, f1, 1, 0.5, KernelSpec{}) == 0.0);
}

TEST_CASE("group variance plug-in") {
  // Balanced constructed fixture: every failure at x = 0, Uniform kernel,
  // m1 = m2 = (failures per group) * K_h(0) / n.
  std::vector<SurvivalSample> raw;
  for (int i = 0; i < 10; ++i) {
    raw.push_back({0.0, 1.0 + i, 1, i % 2});
    raw.push_back({0.0, 1.5 + i, 0, i % 2});
  }
  const SurvivalDataset data(raw);
  const double h = 0.5;
  const double m = 5.0 * (0.5 / h) / 20.0;
  const double expected = 2.0 * 0.5 / m;
  CHECK(rho_variance(data, 0.0, 0, 1, h, parse_kernel("uniform")) == doctest::Approx(expected));

  // Duplicating every sample leaves it unchanged; dropping censored rows
  // changes nothing either (up to the n normalization, which we undo).
  const auto base = fixture::samples(19, two_groups(300, 0.5));
  auto doubled = base;
  doubled.insert(doubled.end(), base.begin(), base.end());
  const double v1 = rho_variance(SurvivalDataset(base), 0.1, 0, 1, 0.3, KernelSpec{});
  const double v2 = rho_variance(SurvivalDataset(doubled), 0.1, 0, 1, 0.3, KernelSpec{});
  CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
  CHECK(rho_variance(SurvivalDataset(base), 0.1, 1, 0, 0.3, KernelSpec{}) == doctest::Approx(v1));

  std::vector<SurvivalSample> starved = {{0.0, 1.0, 1, 0}, {0.0, 2.0, 0, 1}};
  CHECK_THROWS_AS(rho_variance(SurvivalDataset(starved), 0.0, 0, 1, 0.5, KernelSpec{}),
                  VarianceUndefinedError);
}

TEST_CASE("smoothed bias") {
  const auto grid = linspace(-1.0, 1.0, 2001);
  std::vector<double> constant(grid.size(), 0.37), linear, quadratic;
  for (double y : grid) {
    linear.push_back(2.0 * y - 0.1);
    quadratic.push_back(y * y);
  }
  CHECK(smooth_bias(grid, constant, 0.95, 0.2, KernelSpec{}) == doctest::Approx(0.37).epsilon(1e-14));
  CHECK(smooth_bias(grid, linear, 0.2, 0.3, KernelSpec{}) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(smooth_bias(grid, quadratic, 0.0, 1.0, KernelSpec{}) == doctest::Approx(0.2).epsilon(1e-5));
  CHECK_THROWS_AS(smooth_bias(grid, constant, 5.0, 0.2, KernelSpec{}), EstimationError);
}

TEST_CASE("relabelling groups negates rho") {
  const auto data = fixture::dataset(20, two_groups(600, 0.7));
  const auto fits = fit_groups(data, 0.1, 0, 1, 2, 0.4, KernelSpec{});
  const double r = estimate_rho(data, 0.1, 0, 1, fits.fit1, fits.fit2, 0.3, KernelSpec{});
  const double s = estimate_rho(data, 0.1, 1, 0, fits.fit2, fits.fit1, 0.3, KernelSpec{});
  CHECK(r == doctest::Approx(-s).epsilon(1e-8));
}

TEST_CASE("flat parts and an all-covering window reduce to the two-sample MLE") {
  const auto data = fixture::dataset(21, two_groups(300, 0.6));
  const auto zero = fit_with(0.0, {0.0});
  const double rho = estimate_rho(data, 0.0, 0, 1, zero, zero, 10.0, parse_kernel("uniform"));
  const auto ref = two_sample_partial_likelihood_mle(data, arms_from_group(data, 0, 1));
  CHECK(rho == doctest::Approx(ref.alpha).epsilon(1e-8));
}

TEST_CASE("group difference estimate and curve") {
  const auto data = fixture::dataset(22, two_groups(1500, 0.7));
  EstimatorConfig cfg;
  cfg.threads = 1;
  const auto e = estimate_group_difference(data, 0.0, 0, 1, cfg);
  CHECK(e.converged);
  CHECK(e.n1_eff >= 1);
  CHECK(e.n2_eff >= 1);
  CHECK(e.ci.contains(e.rho_hat - e.bias_smoothed));
  CHECK(e.rho_hat == doctest::Approx(0.7).epsilon(0.5));
  const auto grid = linspace(-0.6, 0.6, 7);
  const auto curve = estimate_group_difference_curve(data, grid, 0, 1, cfg);
  REQUIRE(curve.size() == grid.size());
  CHECK(curve[3].rho_hat == doctest::Approx(e.rho_hat).epsilon(1e-10));
  for (const auto& c : curve) {
    CHECK(c.converged);
    CHECK(c.window_censoring >= 0.0);
    CHECK(c.window_censoring <= 1.0);
  }
}
