#include "hazrisk/kernels.hpp"

#include <cmath>
#include <string>

#include "hazrisk/errors.hpp"

namespace hazrisk {

double KernelSpec::operator()(double u) const {
  const double a = std::abs(u);
  if (a > 1.0) return 0.0;
  switch (family) {
    case KernelFamily::Epanechnikov:
      return 0.75 * (1.0 - u * u);
    case KernelFamily::Uniform:
      return 0.5;
    case KernelFamily::Triangular:
      return 1.0 - a;
  }
  return 0.0;
}

double kernel_weight(const KernelSpec& spec, double u, double h) {
  if (!(h > 0.0)) throw InputError("kernel bandwidth must be positive");
  return spec(u / h) / h;
}

// Closed forms on [-1, 1]; the test suite checks each against quadrature.
double kernel_moment(const KernelSpec& spec, int power) {
  if (power < 0) throw InputError("kernel moment power must be nonnegative");
  if (power % 2 == 1) return 0.0;
  const double q = power;
  switch (spec.family) {
    case KernelFamily::Epanechnikov:
      return 1.5 * (1.0 / (q + 1.0) - 1.0 / (q + 3.0));
    case KernelFamily::Uniform:
      return 1.0 / (q + 1.0);
    case KernelFamily::Triangular:
      return 2.0 * (1.0 / (q + 1.0) - 1.0 / (q + 2.0));
  }
  return 0.0;
}

double kernel_square_integral(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::Epanechnikov:
      return 0.6;
    case KernelFamily::Uniform:
      return 0.5;
    case KernelFamily::Triangular:
      return 2.0 / 3.0;
  }
  return 0.0;
}

KernelSpec parse_kernel(std::string_view name) {
  if (name == "epanechnikov") return {KernelFamily::Epanechnikov};
  if (name == "uniform") return {KernelFamily::Uniform};
  if (name == "triangular") return {KernelFamily::Triangular};
  throw InputError("unknown kernel '" + std::string(name) +
                   "' (expected epanechnikov, uniform or triangular)");
}

std::string kernel_name(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::Epanechnikov:
      return "epanechnikov";
    case KernelFamily::Uniform:
      return "uniform";
    case KernelFamily::Triangular:
      return "triangular";
  }
  return "unknown";
}

}  // namespace hazrisk
