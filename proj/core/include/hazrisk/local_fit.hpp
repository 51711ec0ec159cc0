#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hazrisk/bandwidth.hpp"
#include "hazrisk/kernels.hpp"
#include "hazrisk/survival.hpp"

namespace hazrisk {

// First-step local polynomial fit at an anchor. beta_star[k-1] estimates
// psi^{(k)}(anchor) / k!; there is no intercept.
struct LocalPolyFit {
  double anchor = 0.0;
  int degree = 1;
  double bandwidth = 0.0;
  std::vector<double> beta_star;
  bool converged = false;
  int effective_failures = 0;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::string diagnostic;  // why the fit failed, when !converged

  // psi^{(k)}(anchor) estimate, k!*beta_k. Throws InputError if k > degree.
  double derivative(int k) const;

  // sum_{k=1}^{terms} beta_k (x - anchor)^k; terms defaults to degree.
  double polynomial(double x, int terms = -1) const;
};

struct NewtonIterate {
  int iteration = 0;
  Eigen::VectorXd theta;  // working (scaled) parameters
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

struct LocalFitOptions {
  int max_iterations = 50;
  double gradient_tolerance = 1e-8;
  // Called with every Newton iterate, including the start point.
  std::function<void(const NewtonIterate&)> observer;
};

// Local partial log-likelihood at an anchor x,
//   sum_j K_h(X_(j) - x) [ Z_(j)' theta - log sum_{i in R_j} exp(Z_i' theta) K_h(X_i - x) ],
// with Z_i = ((X_i - x)/h, ..., ((X_i - x)/h)^p). Working parameters are
// theta_k = h^k beta_k. Only samples with positive kernel weight enter.
class LocalLikelihood {
 public:
  LocalLikelihood(const SurvivalDataset& data, double x, int degree, double h,
                  const KernelSpec& kernel);

  struct Evaluation {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
  };

  Evaluation evaluate(const Eigen::VectorXd& theta, bool with_hessian = true) const;
  double value(const Eigen::VectorXd& theta) const;

  int degree() const { return degree_; }
  double anchor() const { return anchor_; }
  double bandwidth() const { return bandwidth_; }

  // Failures with positive kernel weight.
  int effective_failures() const { return static_cast<int>(failures_.size()); }
  // Distinct covariate values among positively weighted samples.
  int distinct_values() const { return distinct_values_; }

  std::vector<double> to_beta(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd to_theta(std::span<const double> beta) const;

 private:
  struct Failure {
    std::size_t active;        // position of the failing sample in active_
    std::size_t risk_begin;    // first active position in the risk set
  };

  double anchor_;
  int degree_;
  double bandwidth_;
  Eigen::MatrixXd features_;   // active x degree
  Eigen::VectorXd weights_;    // kernel weight per active sample
  std::vector<Failure> failures_;
  int distinct_values_ = 0;
};

// Maximizes the local partial likelihood by damped Newton from beta* = 0.
// Throws DegenerateWindowError when fewer than degree+1 failures or distinct
// covariate values carry weight, or when the Hessian is numerically
// singular; ConvergenceError when the gradient tolerance is not met within
// the iteration budget.
LocalPolyFit fit_local(const SurvivalDataset& data, double x, int degree,
                       double h1, const KernelSpec& kernel,
                       const LocalFitOptions& options = {});

// One fit per grid point, bandwidth from the rule when given. Failed points
// come back with converged = false and a diagnostic. Runs on `threads`
// workers (0 = default_thread_count()).
std::vector<LocalPolyFit> fit_derivative_curve(
    const SurvivalDataset& data, std::span<const double> grid, int degree,
    double h1, const KernelSpec& kernel,
    const std::optional<VariableBandwidthRule>& rule = std::nullopt,
    const LocalFitOptions& options = {}, unsigned threads = 0);

// Piecewise-linear estimate of psi(x) - psi(x_ref) built by trapezoidal
// integration of the first-derivative estimates. Defined on the largest
// interval of consecutive converged fits that contains x_ref.
class IntegratedCurve {
 public:
  IntegratedCurve(std::vector<double> knots, std::vector<double> values,
                  double x_ref);

  // Throws EstimationError when a failed fit lies between x_ref and x.
  double operator()(double x) const;
  bool defined_at(double x) const;

  double reference() const { return x_ref_; }
  double lower() const { return knots_.front(); }
  double upper() const { return knots_.back(); }
  std::span<const double> knots() const { return knots_; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  double x_ref_;
};

// Throws InputError when x_ref is outside the grid or fewer than two fits
// are given, EstimationError when the fit at x_ref's cell failed.
IntegratedCurve integrate_derivative(std::span<const LocalPolyFit> fits,
                                     double x_ref);

}  // namespace hazrisk
