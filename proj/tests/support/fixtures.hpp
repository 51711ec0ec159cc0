#pragma once

// Random survival datasets for tests, independent of the simulation module.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "hazrisk/survival.hpp"

namespace fixture {

struct Options {
  int n = 200;
  double censor_scale = 3.0;  // C ~ U(0, scale); <= 0 disables censoring
  std::function<double(double)> psi = [](double x) { return x * x * x; };
  std::function<double(std::mt19937_64&)> covariate = [](std::mt19937_64& g) {
    return std::uniform_real_distribution<double>(-1.0, 1.0)(g);
  };
  bool groups = false;
  double group_effect = 0.0;  // added to psi for group 1
};

inline std::vector<hazrisk::SurvivalSample> samples(std::uint64_t seed, const Options& o = {}) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<hazrisk::SurvivalSample> out;
  for (int i = 0; i < o.n; ++i) {
    hazrisk::SurvivalSample s;
    s.x = o.covariate(g);
    double psi = o.psi(s.x);
    if (o.groups) {
      s.group = u(g) < 0.5 ? 0 : 1;
      if (*s.group == 1) psi += o.group_effect;
    }
    const double t = std::exponential_distribution<double>(std::exp(psi))(g);
    if (o.censor_scale > 0.0) {
      const double c = o.censor_scale * u(g);
      s.time = std::min(t, c);
      s.status = t <= c ? 1 : 0;
    } else {
      s.time = t;
      s.status = 1;
    }
    out.push_back(s);
  }
  return out;
}

inline hazrisk::SurvivalDataset dataset(std::uint64_t seed, const Options& o = {}) {
  return hazrisk::SurvivalDataset(samples(seed, o));
}

// Samples in dataset (time-sorted) order, so per-sample vectors built from a
// dataset line up with the oracle's input.
inline std::vector<hazrisk::SurvivalSample> sorted_samples(const hazrisk::SurvivalDataset& d) {
  return {d.samples().begin(), d.samples().end()};
}

}  // namespace fixture
