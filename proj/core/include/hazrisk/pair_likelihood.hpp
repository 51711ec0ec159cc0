#pragma once

#include <vector>

#include "hazrisk/kernels.hpp"
#include "hazrisk/local_fit.hpp"
#include "hazrisk/survival.hpp"

namespace hazrisk {

// Per-sample ingredients of the second-step likelihood, in dataset order:
// plugged polynomial parts eta_i and zeta_i and the window weights k1_i, k2_i
// of the two neighbourhoods being compared.
struct PairLikTerms {
  std::vector<double> eta;
  std::vector<double> zeta;
  std::vector<double> k1;
  std::vector<double> k2;
};

// Second-step objective in the shift parameter a:
//   L(a) = sum_j [k1_(j) eta_(j) + k2_(j) (a + zeta_(j))]
//        - sum_j (k1_(j) + k2_(j)) log sum_{i in R_j} [k1_i e^{eta_i} + k2_i e^{a + zeta_i}].
// Its score is sum_j k2_(j) - sum_j (k1_(j) + k2_(j)) w_j(a) with w_j the
// share of risk-set mass from window 2, so L is concave.
class PairLikelihood {
 public:
  PairLikelihood(const SurvivalDataset& data, const PairLikTerms& terms);

  double value(double a) const;
  double score(double a) const;
  double curvature(double a) const;

  // Throws DivergenceError when one window has no failure mass, or when the
  // risk sets never mix the two windows so the score cannot change sign.
  double maximize(double score_tolerance = 1e-10) const;

  double failure_mass1() const { return mass1_; }
  double failure_mass2() const { return mass2_; }

 private:
  struct Term {
    double weight;     // k1_(j) + k2_(j)
    double log_mass1;  // log sum k1_i e^{eta_i} over R_j, -inf if empty
    double log_mass2;  // log sum k2_i e^{zeta_i} over R_j, -inf if empty
  };

  std::vector<Term> terms_;
  double linear_ = 0.0;
  double mass1_ = 0.0;
  double mass2_ = 0.0;
};

// Terms for psi(x2) - psi(x1): k_l = K_h(X_i - x_l); eta, zeta are the
// first p terms of each anchor's fitted polynomial evaluated at X_i.
PairLikTerms relative_risk_terms(const SurvivalDataset& data, double x1,
                                 double x2, const LocalPolyFit& fit1,
                                 const LocalPolyFit& fit2, int p, double h,
                                 const KernelSpec& kernel);

// Terms for psi(x, z2) - psi(x, z1): k_l = K_h(X_i - x) 1{Z_i = z_l}.
PairLikTerms group_terms(const SurvivalDataset& data, double x, int z1, int z2,
                         const LocalPolyFit& fit1, const LocalPolyFit& fit2,
                         int p, double h, const KernelSpec& kernel);

}  // namespace hazrisk
