#include <doctest.h>

#include <cmath>

#include "hazrisk/concave_solver.hpp"
#include "hazrisk/errors.hpp"

using namespace hazrisk;

TEST_CASE("quadratic maximum in one Newton step") {
  const auto r = maximize_concave_1d([](double x) { return -2.0 * (x - 3.0); },
                                     [](double) { return -2.0; }, 0.0, 1e-12);
  CHECK(r.argmax == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(r.score) <= 1e-12);
}

TEST_CASE("flat-tailed concave function far from the start") {
  // f(x) = 40 x - log(1 + e^x) * 50: maximum where logistic(x) = 0.8.
  auto score = [](double x) { return 40.0 - 50.0 / (1.0 + std::exp(-x)); };
  auto curv = [](double x) {
    const double p = 1.0 / (1.0 + std::exp(-x));
    return -50.0 * p * (1.0 - p);
  };
  const auto r = maximize_concave_1d(score, curv, -30.0, 1e-10);
  CHECK(r.argmax == doctest::Approx(std::log(4.0)).epsilon(1e-10));
}

TEST_CASE("monotone score means no finite maximum") {
  CHECK_THROWS_AS(maximize_concave_1d([](double x) { return std::exp(-x); },
                                      [](double x) { return -std::exp(-x); }, 0.0, 1e-10),
                  DivergenceError);
}
