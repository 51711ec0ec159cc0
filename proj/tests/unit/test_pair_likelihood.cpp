#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "hazrisk/errors.hpp"
#include "hazrisk/pair_likelihood.hpp"
#include "oracles.hpp"

using namespace hazrisk;

namespace {

PairLikTerms random_terms(const SurvivalDataset& data, std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PairLikTerms t;
  const double x1 = 0.5 * u(g), x2 = 0.5 * u(g) + 0.3;
  for (const auto& s : data.samples()) {
    t.eta.push_back(u(g));
    t.zeta.push_back(u(g));
    t.k1.push_back(oracle::kernel_h("epanechnikov", s.x - x1, 0.4));
    t.k2.push_back(oracle::kernel_h("epanechnikov", s.x - x2, 0.4));
  }
  return t;
}

}  // namespace

TEST_CASE("pair likelihood against the direct formula") {
  std::mt19937_64 g(17);
  for (int rep = 0; rep < 5; ++rep) {
    const auto data = fixture::dataset(40 + rep, {.n = 150});
    const auto sorted = fixture::sorted_samples(data);
    const auto t = random_terms(data, g);
    const PairLikelihood lik(data, t);
    auto direct = [&](double a) { return oracle::pair_objective(sorted, a, t.eta, t.zeta, t.k1, t.k2); };
    for (double a : {-2.0, -0.3, 0.0, 0.9, 3.0}) {
      CHECK(lik.value(a) == doctest::Approx(direct(a)).epsilon(1e-11));
      CHECK(lik.score(a) == doctest::Approx(oracle::central_difference(direct, a, 1e-5)).epsilon(1e-6));
      auto score = [&](double b) { return lik.score(b); };
      CHECK(lik.curvature(a) ==
            doctest::Approx(oracle::central_difference(score, a, 1e-5)).epsilon(1e-6));
      CHECK(lik.curvature(a) <= 0.0);
    }
    const double a_hat = lik.maximize();
    CHECK(std::abs(lik.score(a_hat)) <= 1e-10);
    CHECK(a_hat == doctest::Approx(oracle::grid_search_max(direct, -8.0, 8.0)).epsilon(1e-6));
  }
}

TEST_CASE("a window without failures has no finite maximizer") {
  const auto data = fixture::dataset(3, {.n = 80});
  PairLikTerms t;
  for (const auto& s : data.samples()) {
    t.eta.push_back(0.0);
    t.zeta.push_back(0.0);
    t.k1.push_back(1.0);
    t.k2.push_back(s.status == 0 ? 1.0 : 0.0);
  }
  const PairLikelihood lik(data, t);
  CHECK(lik.failure_mass2() == 0.0);
  CHECK_THROWS_AS(lik.maximize(), DivergenceError);
}
