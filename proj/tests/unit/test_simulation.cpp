#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hazrisk/errors.hpp"
#include "hazrisk/simulation.hpp"
#include "oracles.hpp"

using namespace hazrisk;

TEST_CASE("replication streams are reproducible and distinct") {
  auto a = replication_stream(5, 3);
  auto b = replication_stream(5, 3);
  auto c = replication_stream(5, 4);
  auto d = replication_stream(6, 3);
  const double ua = a.uniform();
  CHECK(ua == b.uniform());
  CHECK(ua != c.uniform());
  CHECK(ua != d.uniform());
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    const double z = r.truncated_normal(-0.5, 1.5);
    REQUIRE(z >= -0.5);
    REQUIRE(z <= 1.5);
  }
}

TEST_CASE("design functions") {
  const auto d1 = make_design(1), d2 = make_design(2), d3 = make_design(3);
  CHECK(d1.psi(0.5) == doctest::Approx(0.125));
  CHECK(d2.psi(0.3) == doctest::Approx(0.027 + 1.0 + std::exp(-150.0 * 0.36)));
  CHECK(d3.anchor == -0.6);
  CHECK(d1.anchor == 0.0);
  for (const auto& d : {d1, d2, d3}) {
    const double mass = oracle::integrate([&](double x) { return d.covariate_density(x); }, -1.0, 1.0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    auto psi = [&](double x) { return d.psi(x); };
    for (double x : {-0.7, -0.3, 0.05, 0.6}) {
      CHECK(d.psi_derivative(x) == doctest::Approx(oracle::central_difference(psi, x, 1e-6)).epsilon(1e-6));
    }
  }
  CHECK(d3.covariate_density(0.0) < 0.3 * d3.covariate_density(0.6));
  CHECK_THROWS_AS(make_design(4), InputError);
  CHECK(d3.bandwidth_rule(0.25).at(0.0) == doctest::Approx(0.5));
  CHECK(d3.bandwidth_rule(0.25).at(0.6) == doctest::Approx(0.25));
  CHECK(d2.bandwidth_rule(0.25).at(0.0) == doctest::Approx(0.2));
  CHECK(d2.bandwidth_rule(0.25).at(0.9) == doctest::Approx(0.25));
}

TEST_CASE("generated replications") {
  auto rng = replication_stream(1, 0);
  const auto uncensored = generate_replication(make_design(1), 500, std::nullopt, rng);
  CHECK(uncensored.size() == 500);
  for (const auto& s : uncensored.samples()) {
    CHECK(s.status == 1);
    CHECK(s.time > 0.0);
    CHECK(std::abs(s.x) <= 1.0);
  }

  // Near x = 0 the times are roughly unit exponential.
  auto big = replication_stream(2, 0);
  const auto data = generate_replication(make_design(1), 200000, std::nullopt, big);
  double sum = 0.0;
  int count = 0;
  for (const auto& s : data.samples()) {
    if (std::abs(s.x) < 0.05) {
      sum += s.time;
      ++count;
    }
  }
  CHECK(sum / count == doctest::Approx(1.0).epsilon(0.03));

  auto r3 = replication_stream(3, 0);
  const auto mix = generate_replication(make_design(3), 20000, std::nullopt, r3);
  int middle = 0;
  for (const auto& s : mix.samples()) {
    CHECK(s.x >= -1.0);
    CHECK(s.x <= 1.0);
    if (std::abs(s.x) < 0.1) ++middle;
  }
  const auto d3 = make_design(3);
  const double mass = oracle::integrate([&](double x) { return d3.covariate_density(x); }, -0.1, 0.1);
  CHECK(std::abs(middle / 20000.0 - mass) < 4.0 * std::sqrt(mass * (1.0 - mass) / 20000.0));
  CHECK(mass < 0.07);
}

TEST_CASE("censoring calibration") {
  const auto d = make_design(1);
  double last = 1.0;
  for (double c : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double p = censoring_probability(d, c);
    CHECK(p < last);
    last = p;
  }
  // With psi = 0 the censoring probability is (1 - e^{-c}) / c.
  const CovariateLaw flat{[](double) { return 0.0; }, [](double) { return 0.5; }, {-1.0, 1.0}};
  const double c = calibrate_censoring(flat, 0.3, 1e-10);
  const double ref = oracle::bisection([](double s) { return (1.0 - std::exp(-s)) / s - 0.3; }, 0.1, 20.0, 1e-14);
  CHECK(c == doctest::Approx(ref).epsilon(1e-8));

  const double c1 = calibrate_censoring(d, 0.3);
  CHECK(censoring_probability(d, c1) == doctest::Approx(0.3).epsilon(1e-3));
  CHECK_THROWS_AS(calibrate_censoring(d, 1.2), InputError);
}

namespace {

SimulationConfig small_config(int design) {
  SimulationConfig cfg;
  cfg.design = make_design(design);
  cfg.n = 200;
  cfg.reps = 12;
  cfg.seed = 11;
  cfg.threads = 1;
  cfg.grid = {-0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8};
  cfg.mse_points = cfg.grid;
  return cfg;
}

}  // namespace

TEST_CASE("study bookkeeping with an injected exact estimator") {
  auto cfg = small_config(1);
  const auto grid = cfg.resolved_grid();
  auto exact = [&](const SurvivalDataset&, const SimulationConfig& c) {
    ReplicationCurves out;
    for (double x : grid) {
      const double v = c.design.psi(x) - c.design.psi(c.design.anchor);
      out.fgk.push_back(v);
      out.proposed.push_back(v);
    }
    return out;
  };
  const auto rep = run_study(cfg, exact);
  CHECK(rep.mise_fgk == 0.0);
  CHECK(rep.mise_proposed == 0.0);
  CHECK(rep.rep_failures == 0);

  // Constant error e on a span of 1.6 integrates to 1.6 e^2.
  auto offset = [&](const SurvivalDataset& d, const SimulationConfig& c) {
    auto out = exact(d, c);
    for (double& v : out.fgk) v += 0.1;
    return out;
  };
  const auto shifted = run_study(cfg, offset);
  CHECK(shifted.mise_fgk == doctest::Approx(1.6 * 0.01));
  CHECK(shifted.mise_proposed == 0.0);

  // A curve missing everywhere drops every replication.
  auto broken = [&](const SurvivalDataset& d, const SimulationConfig& c) {
    auto out = exact(d, c);
    std::fill(out.proposed.begin(), out.proposed.end(), std::numeric_limits<double>::quiet_NaN());
    return out;
  };
  CHECK_THROWS_AS(run_study(cfg, broken), EstimationError);

  // One missing point out of nine is under the 90% threshold.
  int calls = 0;
  auto one_gap = [&](const SurvivalDataset& d, const SimulationConfig& c) {
    auto out = exact(d, c);
    if (calls++ == 0) out.fgk[1] = std::numeric_limits<double>::quiet_NaN();
    return out;
  };
  const auto gap = run_study(cfg, one_gap);
  CHECK(gap.fgk_failures == 1);
  CHECK(gap.rep_failures == 1);
  CHECK(std::isnan(gap.rep_ise_fgk[0]));
}

TEST_CASE("study results do not depend on the thread count") {
  auto cfg = small_config(2);
  cfg.censoring_target = 0.3;
  const auto a = run_study(cfg);
  cfg.threads = 4;
  const auto b = run_study(cfg);
  CHECK(a.mise_fgk == b.mise_fgk);
  CHECK(a.mise_proposed == b.mise_proposed);
  CHECK(a.observed_censoring == b.observed_censoring);
  CHECK(a.rep_ise_proposed == b.rep_ise_proposed);
  CHECK(a.observed_censoring == doctest::Approx(0.3).epsilon(0.2));
  for (const auto& m : a.mse_by_point) {
    if (m.x == cfg.design.anchor) {
      CHECK(m.fgk == 0.0);
      CHECK(m.proposed == 0.0);
    }
  }
}

TEST_CASE("grid resolution includes the anchor") {
  auto cfg = small_config(3);
  const auto g = cfg.resolved_grid();
  CHECK(std::find(g.begin(), g.end(), -0.6) != g.end());
  SimulationConfig def;
  CHECK(def.resolved_grid().size() == 101);
  CHECK(def.resolved_mse_points().size() == 11);
  def.reps = 0;
  CHECK_THROWS_AS(def.validate(), InputError);
}

TEST_CASE("coverage harnesses run end to end") {
  EstimatorConfig ec;
  ec.threads = 1;
  const auto rr = relative_risk_coverage(make_design(1), 0.0, 0.5, 300, 8, 0.0, ec, 3);
  CHECK(rr.truth == doctest::Approx(0.125));
  CHECK(rr.successful <= rr.reps);
  CHECK(rr.coverage >= 0.0);
  CHECK(rr.coverage <= 1.0);
  const auto gd = group_difference_coverage(0.0, 0.7, 800, 4, std::nullopt, ec, 3);
  CHECK(gd.truth == 0.7);
  CHECK(gd.successful >= 1);
}
