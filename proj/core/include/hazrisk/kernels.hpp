#pragma once

#include <string>
#include <string_view>

namespace hazrisk {

enum class KernelFamily { Epanechnikov, Uniform, Triangular };

// Symmetric density kernel supported on [-1, 1].
struct KernelSpec {
  KernelFamily family = KernelFamily::Epanechnikov;

  // K(u); zero outside [-1, 1].
  double operator()(double u) const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

// K(u / h) / h. Throws InputError when h <= 0.
double kernel_weight(const KernelSpec& spec, double u, double h);

// Integral of u^power K(u) over the support.
double kernel_moment(const KernelSpec& spec, int power);

// Integral of K(u)^2.
double kernel_square_integral(const KernelSpec& spec);

KernelSpec parse_kernel(std::string_view name);
std::string kernel_name(const KernelSpec& spec);

}  // namespace hazrisk
