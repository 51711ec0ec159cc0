#pragma once

// Independent reference computations for tests. Everything here works on
// raw, unsorted samples with quadratic-time risk sets and shares no code
// with the library beyond the SurvivalSample record.

#include <functional>
#include <string>
#include <vector>

#include "hazrisk/survival.hpp"

namespace oracle {

using Samples = std::vector<hazrisk::SurvivalSample>;

// Kernel by family name: "epanechnikov", "uniform", "triangular".
double kernel(const std::string& family, double u);
double kernel_h(const std::string& family, double u, double h);

// Adaptive Simpson quadrature.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

// Indices i with time_i >= t.
std::vector<std::size_t> risk_set(const Samples& s, double t);

// Local log partial likelihood at anchor x in working parameters
// theta_k = h^k beta_k:
//   sum_j K_h(X_j - x) [eta_j - log sum_{i in R_j} K_h(X_i - x) e^{eta_i}],
//   eta_i = sum_k theta_k ((X_i - x)/h)^k.
double local_objective(const Samples& s, const std::string& family, double x, double h,
                       const std::vector<double>& theta);

// Second-step objective in the shift a with per-sample terms in input order.
double pair_objective(const Samples& s, double a, const std::vector<double>& eta,
                      const std::vector<double>& zeta, const std::vector<double>& k1,
                      const std::vector<double>& k2);

// Two-sample log partial likelihood (Breslow ties); arm 0 is excluded.
double two_sample_loglik(const Samples& s, const std::vector<int>& arms, double alpha);

// Maximizer of f on [lo, hi] by a dense grid followed by golden-section
// refinement around the best grid point.
double grid_search_max(const std::function<double(double)>& f, double lo, double hi,
                       int points = 2001);

double central_difference(const std::function<double(double)>& f, double x, double step);

// Root of a continuous f with a sign change on [lo, hi].
double bisection(const std::function<double(double)>& f, double lo, double hi,
                 double tol = 1e-13);

// Breslow cumulative hazard at t for risk scores in input order.
double breslow(const Samples& s, const std::vector<double>& score, double t);

}  // namespace oracle
