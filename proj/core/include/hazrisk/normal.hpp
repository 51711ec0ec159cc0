#pragma once

namespace hazrisk {

// Standard normal CDF.
double normal_cdf(double z);

// Inverse of the standard normal CDF for p in (0, 1). Rational
// approximation refined by one Halley step; absolute error below 1e-12 over
// [1e-12, 1 - 1e-12].
double normal_quantile(double p);

}  // namespace hazrisk
