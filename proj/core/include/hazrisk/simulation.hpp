#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hazrisk/bandwidth.hpp"
#include "hazrisk/config.hpp"
#include "hazrisk/kernels.hpp"
#include "hazrisk/survival.hpp"

namespace hazrisk {

// Deterministic random stream. Uniform draws are built from the top 53 bits
// of a 64-bit Mersenne twister so the sequence is identical on every
// platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal restricted to [a, b], by inverse CDF.
  double truncated_normal(double a, double b);
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Stream for replication `rep` of a study seeded with `seed`.
Rng replication_stream(std::uint64_t seed, std::uint64_t rep);

enum class DesignId { D1 = 1, D2 = 2, D3 = 3 };

// Simulation designs on the covariate support [-1, 1]:
//   D1  X ~ U(-1, 1), psi(x) = x^3
//   D2  X ~ U(-1, 1), psi(x) = x^3 + exp(-150 (x + 0.3)^2) + exp(-150 (x - 0.3)^2)
//   D3  X an even mixture of N(-0.6, 0.3^2) truncated to (-1, 0) and
//       N(0.6, 0.3^2) truncated to (0, 1); psi(x) = x^3
struct DesignSpec {
  DesignId id = DesignId::D1;
  double anchor = 0.0;

  double psi(double x) const;
  double psi_derivative(double x) const;
  double sample_covariate(Rng& rng) const;
  double covariate_density(double x) const;
  // Base-bandwidth rule h^0(x) for a base h.
  VariableBandwidthRule bandwidth_rule(double h0) const;
  std::string name() const;
};

DesignSpec make_design(DesignId id);
DesignSpec make_design(int id);

// n samples with T | X exponential of rate exp(psi(X)) and, when
// censoring_scale is set, C ~ U(0, c).
SurvivalDataset generate_replication(const DesignSpec& design, int n,
                                     std::optional<double> censoring_scale,
                                     Rng& rng);

// Exponential survival times with rate e^{psi(X)} and X with the given
// density, supported on [breaks.front(), breaks.back()]. Inner breaks mark
// points where the density is not smooth.
struct CovariateLaw {
  std::function<double(double)> psi;
  std::function<double(double)> density;
  std::vector<double> breaks;
};

CovariateLaw covariate_law(const DesignSpec& design);

// P(T > C) for C ~ U(0, c): E_X[(1 - exp(-c e^{psi(X)})) / (c e^{psi(X)})],
// with the expectation taken by adaptive quadrature over the covariate law.
double censoring_probability(const CovariateLaw& law, double c);
double censoring_probability(const DesignSpec& design, double c);

// Censoring scale c achieving the target censoring proportion, found by
// bracketing and bisection on the monotone decreasing P(T > C).
double calibrate_censoring(const CovariateLaw& law, double target, double tol = 1e-4);
double calibrate_censoring(const DesignSpec& design, double target,
                           double tol = 1e-4);

struct SimulationConfig {
  DesignSpec design;
  int n = 300;
  int reps = 500;
  double censoring_target = 0.0;  // 0 disables censoring
  double h0 = 0.25;
  std::vector<double> grid;       // defaults to 101 points on [-1, 1]
  std::vector<double> mse_points; // defaults to -1, -0.8, ..., 1
  std::uint64_t seed = 1;
  int p = 1;
  int p1 = 1;  // local linear first step
  double h_ratio = 0.8;
  KernelSpec kernel;
  unsigned threads = 0;

  void validate() const;
  std::vector<double> resolved_grid() const;
  std::vector<double> resolved_mse_points() const;
};

// Estimated curves psi_hat(g) - psi_hat(anchor) on the study grid; NaN marks
// a point the estimator could not produce.
struct ReplicationCurves {
  std::vector<double> fgk;
  std::vector<double> proposed;
};

using CurveEstimator = std::function<ReplicationCurves(
    const SurvivalDataset&, const SimulationConfig&)>;

// Integrated-derivative curve and two-window curve for one dataset.
ReplicationCurves estimate_replication_curves(const SurvivalDataset& data,
                                              const SimulationConfig& config);

struct PointMse {
  double x = 0.0;
  double fgk = 0.0;       // mean squared error
  double proposed = 0.0;
  int fgk_count = 0;
  int proposed_count = 0;
};

struct SimulationReport {
  std::string design;
  int n = 0;
  int reps = 0;
  double censoring_target = 0.0;
  double censoring_scale = 0.0;   // 0 when uncensored
  double observed_censoring = 0.0;
  double h0 = 0.0;
  std::uint64_t seed = 0;
  int grid_points = 0;
  double mise_fgk = 0.0;
  double mise_proposed = 0.0;
  std::vector<PointMse> mse_by_point;
  std::optional<double> coverage;
  int fgk_failures = 0;       // replications dropped for the FGK curve
  int proposed_failures = 0;  // replications dropped for the new curve
  int rep_failures = 0;       // replications dropped for either
  // Per-replication ISE in replication order; NaN where dropped.
  std::vector<double> rep_ise_fgk;
  std::vector<double> rep_ise_proposed;
  double runtime_seconds = 0.0;
  // Pointwise mean curves over successful replications (plot data).
  std::vector<double> grid;
  std::vector<double> mean_fgk;
  std::vector<double> mean_proposed;
  std::vector<double> truth;
};

// Monte Carlo study. A replication's ISE is the squared error integrated
// over the grid span, approximated by span times the mean over the grid
// points it produced, provided at least 90% of them; otherwise the
// replication is dropped for that estimator and counted. More than 10%
// dropped replications for either estimator throws EstimationError.
SimulationReport run_study(const SimulationConfig& config,
                           const CurveEstimator& estimator = {});

struct CoverageResult {
  double truth = 0.0;
  int reps = 0;
  int successful = 0;
  double mean_estimate = 0.0;
  double mc_standard_error = 0.0;  // of the mean estimate
  double coverage = 0.0;           // share of successful reps covering truth
};

// Replicated relative-risk estimation at (x1, x2) with bias-corrected CIs.
CoverageResult relative_risk_coverage(const DesignSpec& design, double x1,
                                      double x2, int n, int reps,
                                      double censoring_target,
                                      const EstimatorConfig& config,
                                      std::uint64_t seed);

// Two-group data: X ~ U(-1, 1), Z ~ Bernoulli(1/2) labelled 0/1,
// psi(x, 0) = x^3, psi(x, 1) = x^3 + rho. Censoring U(0, c) when set.
SurvivalDataset generate_two_group(int n, double rho,
                                   std::optional<double> censoring_scale,
                                   Rng& rng);

CoverageResult group_difference_coverage(double x, double rho, int n, int reps,
                                         std::optional<double> censoring_scale,
                                         const EstimatorConfig& config,
                                         std::uint64_t seed);

}  // namespace hazrisk
