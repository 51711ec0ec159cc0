#include "hazrisk/pair_likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hazrisk/concave_solver.hpp"
#include "hazrisk/errors.hpp"

namespace hazrisk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^a + e^b) with -inf as the empty sum.
double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Share of window-2 mass, 1 / (1 + e^{log_mass1 - a - log_mass2}).
double window2_share(double a, double log_mass1, double log_mass2) {
  if (log_mass2 == kNegInf) return 0.0;
  if (log_mass1 == kNegInf) return 1.0;
  const double d = log_mass1 - a - log_mass2;
  if (d > 0.0) {
    const double e = std::exp(-d);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(d));
}

double max_finite(const std::vector<double>& v, const std::vector<double>& weight) {
  double m = kNegInf;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (weight[i] > 0.0) m = std::max(m, v[i]);
  }
  return m == kNegInf ? 0.0 : m;
}

}  // namespace

PairLikelihood::PairLikelihood(const SurvivalDataset& data,
                               const PairLikTerms& terms) {
  const std::size_t n = data.size();
  if (terms.eta.size() != n || terms.zeta.size() != n || terms.k1.size() != n ||
      terms.k2.size() != n) {
    throw InputError("pair likelihood terms must have one entry per sample");
  }

  const double shift1 = max_finite(terms.eta, terms.k1);
  const double shift2 = max_finite(terms.zeta, terms.k2);

  std::vector<double> mass1(n + 1, 0.0);
  std::vector<double> mass2(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    mass1[i] = mass1[i + 1] +
               (terms.k1[i] > 0.0 ? terms.k1[i] * std::exp(terms.eta[i] - shift1) : 0.0);
    mass2[i] = mass2[i + 1] +
               (terms.k2[i] > 0.0 ? terms.k2[i] * std::exp(terms.zeta[i] - shift2) : 0.0);
  }

  const auto failures = data.failure_index();
  const auto starts = data.risk_start();
  for (std::size_t j = 0; j < failures.size(); ++j) {
    const std::size_t f = failures[j];
    const double k1 = terms.k1[f];
    const double k2 = terms.k2[f];
    if (k1 <= 0.0 && k2 <= 0.0) continue;
    const double m1 = mass1[starts[j]];
    const double m2 = mass2[starts[j]];
    terms_.push_back({k1 + k2, m1 > 0.0 ? std::log(m1) + shift1 : kNegInf,
                      m2 > 0.0 ? std::log(m2) + shift2 : kNegInf});
    if (k1 > 0.0) linear_ += k1 * terms.eta[f];
    if (k2 > 0.0) linear_ += k2 * terms.zeta[f];
    mass1_ += std::max(k1, 0.0);
    mass2_ += std::max(k2, 0.0);
  }
}

double PairLikelihood::value(double a) const {
  double total = linear_ + a * mass2_;
  for (const Term& t : terms_) {
    const double shifted2 = t.log_mass2 == kNegInf ? kNegInf : a + t.log_mass2;
    total -= t.weight * log_add(t.log_mass1, shifted2);
  }
  return total;
}

double PairLikelihood::score(double a) const {
  double total = mass2_;
  for (const Term& t : terms_) total -= t.weight * window2_share(a, t.log_mass1, t.log_mass2);
  return total;
}

double PairLikelihood::curvature(double a) const {
  double total = 0.0;
  for (const Term& t : terms_) {
    const double w = window2_share(a, t.log_mass1, t.log_mass2);
    total -= t.weight * w * (1.0 - w);
  }
  return total;
}

double PairLikelihood::maximize(double score_tolerance) const {
  if (!(mass1_ > 0.0) || !(mass2_ > 0.0)) {
    throw DivergenceError(
        "second-step likelihood is monotone: one window has no failures");
  }
  // Limits of the score at -inf and +inf decide whether a root exists.
  double at_plus = mass2_;
  double at_minus = mass2_;
  for (const Term& t : terms_) {
    if (t.log_mass2 != kNegInf) at_plus -= t.weight;
    if (t.log_mass1 == kNegInf) at_minus -= t.weight;
  }
  if (!(at_plus < 0.0) || !(at_minus > 0.0)) {
    throw DivergenceError(
        "second-step likelihood is monotone: risk sets never mix the two windows");
  }
  return maximize_concave_1d([this](double a) { return score(a); },
                             [this](double a) { return curvature(a); }, 0.0,
                             score_tolerance)
      .argmax;
}

PairLikTerms relative_risk_terms(const SurvivalDataset& data, double x1,
                                 double x2, const LocalPolyFit& fit1,
                                 const LocalPolyFit& fit2, int p, double h,
                                 const KernelSpec& kernel) {
  const std::size_t n = data.size();
  PairLikTerms t{std::vector<double>(n), std::vector<double>(n),
                 std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = data[i].x;
    t.k1[i] = kernel_weight(kernel, x - x1, h);
    t.k2[i] = kernel_weight(kernel, x - x2, h);
    t.eta[i] = t.k1[i] > 0.0 ? fit1.polynomial(x, p) : 0.0;
    t.zeta[i] = t.k2[i] > 0.0 ? fit2.polynomial(x, p) : 0.0;
  }
  return t;
}

PairLikTerms group_terms(const SurvivalDataset& data, double x, int z1, int z2,
                         const LocalPolyFit& fit1, const LocalPolyFit& fit2,
                         int p, double h, const KernelSpec& kernel) {
  const std::size_t n = data.size();
  PairLikTerms t{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                 std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (!data[i].group) continue;
    const double k = kernel_weight(kernel, data[i].x - x, h);
    if (k <= 0.0) continue;
    if (*data[i].group == z1) {
      t.k1[i] = k;
      t.eta[i] = fit1.polynomial(data[i].x, p);
    } else if (*data[i].group == z2) {
      t.k2[i] = k;
      t.zeta[i] = fit2.polynomial(data[i].x, p);
    }
  }
  return t;
}

}  // namespace hazrisk
