#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hazrisk/kernels.hpp"

namespace hazrisk {

// Piecewise-constant bandwidth: base * multiplier of the first piece whose
// closed interval [lo, hi] contains x, or base when none does.
struct VariableBandwidthRule {
  struct Piece {
    double lo = 0.0;
    double hi = 0.0;
    double multiplier = 1.0;
  };

  double base = 0.25;
  std::vector<Piece> pieces;

  double at(double x) const;

  // Throws InputError for a nonpositive base or multiplier, an inverted
  // interval, or overlapping intervals.
  void validate() const;

  static VariableBandwidthRule constant(double h);

  // Accepts "const:<h>" or "piecewise:<h>,<lo>:<hi>=<mult>[,...]".
  static VariableBandwidthRule parse(std::string_view text);
  std::string to_string() const;
};

double bandwidth_at(const VariableBandwidthRule& rule, double x);

struct BandwidthPlan {
  int p = 1;
  KernelSpec kernel;
  double c0p = 0.0;
  std::function<double(double)> weight;
};

// Constant of the asymptotically optimal bandwidth for a degree-p plug-in,
//   [((p+1)!)^2 * int K^2 / (2 (p+1) (int u^{p+1} K)^2)]^{1/(2p+3)},
// obtained by minimizing h^{2p+2} B + V / (n h). Throws InputError when the
// (p+1)st kernel moment vanishes (even p with a symmetric kernel).
double derive_c0p(const KernelSpec& kernel, int p);

// Shipped table of C_{0,p}(K) values, rounded to three decimals. Only
// entries whose leading bias term is nonzero are present; throws InputError
// for anything else.
double default_c0p(const KernelSpec& kernel, int p);

BandwidthPlan make_plan(const KernelSpec& kernel, int p,
                        std::function<double(double)> weight);

// C0p * (variance_integral / curvature_integral)^{1/(2p+3)} * n^{-1/(2p+3)}
// with the double-integral plug-ins for the pairwise relative risk.
double h_opt_relative_risk(const BandwidthPlan& plan, double variance_integral,
                           double curvature_integral, long n);

// Same power law with the single-integral plug-ins of the group difference.
double h_opt_group_diff(const BandwidthPlan& plan, double variance_integral,
                        double curvature_integral, long n);

// Trapezoidal approximation of int f(x) w(x) dx over a grid.
double weighted_integral(std::span<const double> grid,
                         std::span<const double> values,
                         const std::function<double(double)>& weight);

// Trapezoidal approximation of
//   int int (d(x2) - d(x1))^2 w(x1) w(x2) dx1 dx2
// from a (p+1)st-derivative curve d sampled on the grid.
double pairwise_curvature_integral(std::span<const double> grid,
                                   std::span<const double> derivative,
                                   const std::function<double(double)>& weight);

// int (d2(x) - d1(x))^2 w(x) dx from two per-group derivative curves.
double group_curvature_integral(std::span<const double> grid,
                                std::span<const double> derivative1,
                                std::span<const double> derivative2,
                                const std::function<double(double)>& weight);

}  // namespace hazrisk
