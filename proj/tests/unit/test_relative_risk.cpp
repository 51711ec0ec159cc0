#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "hazrisk/errors.hpp"
#include "hazrisk/grid.hpp"
#include "hazrisk/relative_risk.hpp"
#include "oracles.hpp"

using namespace hazrisk;

namespace {

LocalPolyFit constant_fit(double x, std::vector<double> beta) {
  LocalPolyFit f;
  f.anchor = x;
  f.degree = static_cast<int>(beta.size());
  f.beta_star = std::move(beta);
  f.converged = true;
  return f;
}

}  // namespace

TEST_CASE("alpha is zero at coincident points and antisymmetric") {
  const auto data = fixture::dataset(12, {.n = 400});
  const KernelSpec k{};
  const auto f1 = fit_local(data, -0.2, 2, 0.3, k);
  const auto f2 = fit_local(data, 0.4, 2, 0.3, k);
  CHECK(std::abs(estimate_alpha(data, -0.2, -0.2, f1, f1, 0.25, k)) <= 1e-10);
  const double a12 = estimate_alpha(data, -0.2, 0.4, f1, f2, 0.25, k);
  const double a21 = estimate_alpha(data, 0.4, -0.2, f2, f1, 0.25, k);
  CHECK(a12 == doctest::Approx(-a21).epsilon(1e-8));
}

TEST_CASE("bias plug-in formula") {
  // psi''(x2) = 2, psi''(x1) = -2 so beta_2 = +-1; h = 0.5, mu_2 = 0.2.
  const auto f1 = constant_fit(0.0, {0.0, -1.0});
  const auto f2 = constant_fit(0.5, {0.0, 1.0});
  CHECK(alpha_bias(f1, f2, 1, 0.5, KernelSpec{}) == doctest::Approx(0.1));
  CHECK(alpha_bias(f1, f2, 1, 0.25, KernelSpec{}) == doctest::Approx(0.025));
  CHECK(alpha_bias(f2, f2, 1, 0.5, KernelSpec{}) == 0.0);
  CHECK_THROWS_AS(alpha_bias(constant_fit(0.0, {1.0}), f2, 1, 0.5, KernelSpec{}), InputError);
}

TEST_CASE("variance plug-in matches the direct risk-set sums") {
  const auto data = fixture::dataset(13, {.n = 200});
  const auto sorted = fixture::sorted_samples(data);
  std::vector<double> d(data.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::pow(sorted[i].x, 3);
  const double x1 = -0.1, x2 = 0.5, h = 0.3;
  double total = 0.0;
  for (const auto& s : sorted) {
    if (s.status != 1) continue;
    double a = 0.0, b = 0.0, all = 0.0;
    for (std::size_t i : oracle::risk_set(sorted, s.time)) {
      const double e = std::exp(d[i]);
      a += oracle::kernel_h("epanechnikov", sorted[i].x - x1, h) * e;
      b += oracle::kernel_h("epanechnikov", sorted[i].x - x2, h) * e;
      all += e;
    }
    if (a + b > 0.0) total += a * b / (all * (a + b));
  }
  const double expected = 0.6 / (total / static_cast<double>(sorted.size()));
  const double got = alpha_variance(data, x1, x2, h, KernelSpec{}, d);
  CHECK(got == doctest::Approx(expected).epsilon(1e-11));

  // A common shift of D cancels.
  auto shifted = d;
  for (double& v : shifted) v += 7.5;
  CHECK(alpha_variance(data, x1, x2, h, KernelSpec{}, shifted) == doctest::Approx(got).epsilon(1e-13));
}

TEST_CASE("full estimate assembles a bias-corrected interval") {
  const auto data = fixture::dataset(14, {.n = 500});
  EstimatorConfig cfg;
  cfg.threads = 1;
  const auto e = estimate_relative_risk(data, 0.0, 0.5, cfg);
  CHECK(e.converged);
  CHECK(e.se_hat == doctest::Approx(std::sqrt(e.sigma2_hat / (500 * cfg.h))));
  const double center = e.alpha_hat - e.bias_hat;
  CHECK(0.5 * (e.ci.lo + e.ci.hi) == doctest::Approx(center));
  CHECK(e.ci.hi - e.ci.lo == doctest::Approx(2.0 * 1.959963984540054 * e.se_hat).epsilon(1e-10));

  cfg.bias_correction = false;
  const auto raw = estimate_relative_risk(data, 0.0, 0.5, cfg);
  CHECK(raw.bias_hat == 0.0);
  CHECK(raw.alpha_hat == doctest::Approx(e.alpha_hat));

  cfg.bias_correction = true;
  cfg.p1 = 1;
  const auto no_bias = estimate_relative_risk(data, 0.0, 0.5, cfg);
  CHECK(no_bias.bias_unavailable);
}

TEST_CASE("configuration and range errors") {
  const auto data = fixture::dataset(15, {.n = 200});
  EstimatorConfig cfg;
  CHECK_THROWS_AS(estimate_relative_risk(data, 3.0, 0.0, cfg), EstimationError);
  cfg.h = 0.3;
  cfg.h1 = 0.25;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.ci_level = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.p1 = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("anchored curve and chained estimates") {
  const auto data = fixture::dataset(16, {.n = 400});
  EstimatorConfig cfg;
  cfg.threads = 2;
  const auto grid = linspace(-0.8, 0.8, 9);
  const auto alpha = anchored_alpha(data, 0.0, grid, cfg);
  CHECK(alpha[4] == 0.0);
  const auto curve = estimate_curve(data, 0.0, grid, cfg);
  REQUIRE(curve.estimates.size() == grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CHECK(curve.estimates[g].alpha_hat == doctest::Approx(alpha[g]).epsilon(1e-12));
  }
  const double direct = alpha[8];
  const double chained = estimate_alpha_chained(data, 0.0, 0.4, 0.8, cfg);
  CHECK(std::isfinite(chained));
  CHECK(std::abs(chained - direct) < 0.5);
}
