#include "hazrisk/bandwidth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "hazrisk/errors.hpp"

namespace hazrisk {

double VariableBandwidthRule::at(double x) const {
  for (const Piece& piece : pieces) {
    if (x >= piece.lo && x <= piece.hi) return base * piece.multiplier;
  }
  return base;
}

void VariableBandwidthRule::validate() const {
  if (!(base > 0.0)) throw InputError("bandwidth base must be positive");
  std::vector<Piece> sorted = pieces;
  std::sort(sorted.begin(), sorted.end(),
            [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (!(sorted[k].multiplier > 0.0)) throw InputError("bandwidth multipliers must be positive");
    if (!(sorted[k].lo <= sorted[k].hi)) throw InputError("bandwidth interval has lo > hi");
    if (k > 0 && !(sorted[k - 1].hi < sorted[k].lo)) {
      throw InputError("bandwidth intervals overlap");
    }
  }
}

VariableBandwidthRule VariableBandwidthRule::constant(double h) {
  VariableBandwidthRule rule;
  rule.base = h;
  rule.validate();
  return rule;
}

namespace {

double parse_number(std::string_view text, std::string_view context) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw InputError("bad number '" + std::string(text) + "' in bandwidth rule " +
                     std::string(context));
  }
  return v;
}

}  // namespace

VariableBandwidthRule VariableBandwidthRule::parse(std::string_view text) {
  VariableBandwidthRule rule;
  if (text.starts_with("const:")) {
    rule.base = parse_number(text.substr(6), text);
  } else if (text.starts_with("piecewise:")) {
    std::vector<std::string_view> items;
    std::string_view rest = text.substr(10);
    for (;;) {
      const auto comma = rest.find(',');
      items.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    rule.base = parse_number(items.front(), text);
    for (std::size_t k = 1; k < items.size(); ++k) {
      const std::string_view item = items[k];
      const auto colon = item.find(':');
      const auto eq = item.find('=');
      if (colon == std::string_view::npos || eq == std::string_view::npos || eq < colon) {
        throw InputError("bandwidth piece '" + std::string(item) +
                         "' must look like <lo>:<hi>=<multiplier>");
      }
      rule.pieces.push_back({parse_number(item.substr(0, colon), text),
                             parse_number(item.substr(colon + 1, eq - colon - 1), text),
                             parse_number(item.substr(eq + 1), text)});
    }
  } else {
    throw InputError("bandwidth rule must start with 'const:' or 'piecewise:'");
  }
  rule.validate();
  return rule;
}

std::string VariableBandwidthRule::to_string() const {
  std::ostringstream out;
  out.precision(17);
  if (pieces.empty()) {
    out << "const:" << base;
    return out.str();
  }
  out << "piecewise:" << base;
  for (const Piece& p : pieces) out << ',' << p.lo << ':' << p.hi << '=' << p.multiplier;
  return out.str();
}

double bandwidth_at(const VariableBandwidthRule& rule, double x) { return rule.at(x); }

double derive_c0p(const KernelSpec& kernel, int p) {
  if (p < 0) throw InputError("degree must be nonnegative");
  const double moment = kernel_moment(kernel, p + 1);
  if (moment == 0.0) {
    throw InputError("leading bias vanishes for this degree and kernel; no C0p");
  }
  const double factorial = std::tgamma(p + 2.0);
  const double ratio = factorial * factorial * kernel_square_integral(kernel) /
                       (2.0 * (p + 1) * moment * moment);
  return std::pow(ratio, 1.0 / (2 * p + 3));
}

double default_c0p(const KernelSpec& kernel, int p) {
  struct Entry {
    KernelFamily family;
    int p;
    double value;
  };
  // Rounded closed-form values of derive_c0p; the Epanechnikov and uniform
  // p = 1 entries agree with the standard local linear tables.
  static constexpr Entry kTable[] = {
      {KernelFamily::Epanechnikov, 1, 1.719}, {KernelFamily::Epanechnikov, 3, 2.623},
      {KernelFamily::Uniform, 1, 1.351},      {KernelFamily::Uniform, 3, 2.129},
      {KernelFamily::Triangular, 1, 1.888},   {KernelFamily::Triangular, 3, 2.806},
  };
  for (const Entry& e : kTable) {
    if (e.family == kernel.family && e.p == p) return e.value;
  }
  throw InputError("no shipped C0p for kernel " + kernel_name(kernel) + " and p=" +
                   std::to_string(p) + " (even p has no leading bias term)");
}

BandwidthPlan make_plan(const KernelSpec& kernel, int p,
                        std::function<double(double)> weight) {
  return {p, kernel, default_c0p(kernel, p), std::move(weight)};
}

namespace {

double power_law(const BandwidthPlan& plan, double variance_integral,
                 double curvature_integral, long n) {
  if (!(plan.c0p > 0.0)) throw InputError("C0p must be positive");
  if (plan.p < 0) throw InputError("degree must be nonnegative");
  if (!(variance_integral > 0.0)) throw InputError("variance integral must be positive");
  if (!(curvature_integral > 0.0)) {
    throw InputError("curvature integral is zero: no finite optimal bandwidth");
  }
  if (n < 1) throw InputError("sample size must be positive");
  const double exponent = 1.0 / (2 * plan.p + 3);
  return plan.c0p * std::pow(variance_integral / curvature_integral, exponent) *
         std::pow(static_cast<double>(n), -exponent);
}

}  // namespace

double h_opt_relative_risk(const BandwidthPlan& plan, double variance_integral,
                           double curvature_integral, long n) {
  return power_law(plan, variance_integral, curvature_integral, n);
}

double h_opt_group_diff(const BandwidthPlan& plan, double variance_integral,
                        double curvature_integral, long n) {
  return power_law(plan, variance_integral, curvature_integral, n);
}

namespace {

std::vector<double> trapezoid_weights(std::span<const double> grid) {
  if (grid.size() < 2) throw InputError("quadrature grid needs at least two points");
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    const double half = 0.5 * (grid[g + 1] - grid[g]);
    if (!(half > 0.0)) throw InputError("quadrature grid must be strictly increasing");
    w[g] += half;
    w[g + 1] += half;
  }
  return w;
}

}  // namespace

double weighted_integral(std::span<const double> grid, std::span<const double> values,
                         const std::function<double(double)>& weight) {
  if (grid.size() != values.size()) throw InputError("grid and values differ in length");
  const auto t = trapezoid_weights(grid);
  double total = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) total += t[g] * values[g] * weight(grid[g]);
  return total;
}

double pairwise_curvature_integral(std::span<const double> grid,
                                   std::span<const double> derivative,
                                   const std::function<double(double)>& weight) {
  if (grid.size() != derivative.size()) throw InputError("grid and values differ in length");
  const auto t = trapezoid_weights(grid);
  double total = 0.0;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const double wa = t[a] * weight(grid[a]);
    for (std::size_t b = 0; b < grid.size(); ++b) {
      const double diff = derivative[b] - derivative[a];
      total += wa * t[b] * weight(grid[b]) * diff * diff;
    }
  }
  return total;
}

double group_curvature_integral(std::span<const double> grid,
                                std::span<const double> derivative1,
                                std::span<const double> derivative2,
                                const std::function<double(double)>& weight) {
  if (derivative1.size() != grid.size() || derivative2.size() != grid.size()) {
    throw InputError("grid and values differ in length");
  }
  std::vector<double> sq(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double diff = derivative2[g] - derivative1[g];
    sq[g] = diff * diff;
  }
  return weighted_integral(grid, sq, weight);
}

}  // namespace hazrisk
