#include "hazrisk/local_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "hazrisk/errors.hpp"
#include "hazrisk/parallel.hpp"

namespace hazrisk {

double LocalPolyFit::derivative(int k) const {
  if (k < 1 || k > degree || static_cast<std::size_t>(k) > beta_star.size()) {
    std::ostringstream msg;
    msg << "derivative of order " << k << " needs a fit of degree >= " << k
        << ", have degree " << degree;
    throw InputError(msg.str());
  }
  return std::tgamma(k + 1.0) * beta_star[static_cast<std::size_t>(k - 1)];
}

double LocalPolyFit::polynomial(double x, int terms) const {
  const std::size_t m = terms < 0
                            ? beta_star.size()
                            : std::min(beta_star.size(), static_cast<std::size_t>(terms));
  const double u = x - anchor;
  double power = 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    power *= u;
    total += beta_star[k] * power;
  }
  return total;
}

LocalLikelihood::LocalLikelihood(const SurvivalDataset& data, double x,
                                 int degree, double h, const KernelSpec& kernel)
    : anchor_(x), degree_(degree), bandwidth_(h) {
  if (degree < 1) throw InputError("local fit degree must be at least 1");
  if (!(h > 0.0)) throw InputError("local fit bandwidth must be positive");

  const std::size_t n = data.size();
  std::vector<std::size_t> active_before(n + 1, 0);  // active samples with index < i
  std::vector<long> active_pos(n, -1);
  std::vector<std::size_t> active_index;
  std::vector<double> active_weight;
  std::set<double> distinct;
  for (std::size_t i = 0; i < n; ++i) {
    active_before[i] = active_index.size();
    const double w = kernel_weight(kernel, data[i].x - x, h);
    if (w > 0.0) {
      active_pos[i] = static_cast<long>(active_index.size());
      active_index.push_back(i);
      active_weight.push_back(w);
      distinct.insert(data[i].x);
    }
  }
  active_before[n] = active_index.size();
  distinct_values_ = static_cast<int>(distinct.size());

  const auto m = static_cast<Eigen::Index>(active_index.size());
  features_.resize(degree, m);
  weights_.resize(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const double z = (data[active_index[static_cast<std::size_t>(a)]].x - x) / h;
    double power = 1.0;
    for (int k = 0; k < degree; ++k) {
      power *= z;
      features_(k, a) = power;
    }
    weights_(a) = active_weight[static_cast<std::size_t>(a)];
  }

  const auto failures = data.failure_index();
  const auto starts = data.risk_start();
  for (std::size_t j = 0; j < failures.size(); ++j) {
    const long pos = active_pos[failures[j]];
    if (pos < 0) continue;
    failures_.push_back({static_cast<std::size_t>(pos), active_before[starts[j]]});
  }
}

LocalLikelihood::Evaluation LocalLikelihood::evaluate(const Eigen::VectorXd& theta,
                                                      bool with_hessian) const {
  if (theta.size() != degree_) throw InputError("parameter length must equal degree");
  Evaluation out;
  out.gradient = Eigen::VectorXd::Zero(degree_);
  if (with_hessian) out.hessian = Eigen::MatrixXd::Zero(degree_, degree_);
  if (failures_.empty()) return out;

  const Eigen::VectorXd eta = features_.transpose() * theta;
  const double shift = eta.maxCoeff();
  const Eigen::VectorXd risk =
      weights_.array() * (eta.array() - shift).exp();

  // Risk sets are suffixes of the active list; walk failures from the last
  // one backwards so each sample is added to the running sums once.
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(degree_);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(degree_, degree_);
  auto next = static_cast<std::size_t>(features_.cols());
  for (std::size_t f = failures_.size(); f-- > 0;) {
    const Failure& fail = failures_[f];
    while (next > fail.risk_begin) {
      --next;
      const auto a = static_cast<Eigen::Index>(next);
      const double r = risk(a);
      s0 += r;
      s1.noalias() += r * features_.col(a);
      if (with_hessian) s2.noalias() += r * features_.col(a) * features_.col(a).transpose();
    }
    const auto a = static_cast<Eigen::Index>(fail.active);
    const double k = weights_(a);
    const Eigen::VectorXd mean = s1 / s0;
    out.value += k * (eta(a) - std::log(s0) - shift);
    out.gradient.noalias() += k * (features_.col(a) - mean);
    if (with_hessian) {
      out.hessian.noalias() -= k * (s2 / s0 - mean * mean.transpose());
    }
  }
  return out;
}

double LocalLikelihood::value(const Eigen::VectorXd& theta) const {
  return evaluate(theta, false).value;
}

std::vector<double> LocalLikelihood::to_beta(const Eigen::VectorXd& theta) const {
  std::vector<double> beta(static_cast<std::size_t>(degree_));
  double scale = 1.0;
  for (int k = 0; k < degree_; ++k) {
    scale *= bandwidth_;
    beta[static_cast<std::size_t>(k)] = theta(k) / scale;
  }
  return beta;
}

Eigen::VectorXd LocalLikelihood::to_theta(std::span<const double> beta) const {
  if (beta.size() != static_cast<std::size_t>(degree_)) {
    throw InputError("coefficient length must equal degree");
  }
  Eigen::VectorXd theta(degree_);
  double scale = 1.0;
  for (int k = 0; k < degree_; ++k) {
    scale *= bandwidth_;
    theta(k) = beta[static_cast<std::size_t>(k)] * scale;
  }
  return theta;
}

LocalPolyFit fit_local(const SurvivalDataset& data, double x, int degree,
                       double h1, const KernelSpec& kernel,
                       const LocalFitOptions& options) {
  const LocalLikelihood lik(data, x, degree, h1, kernel);

  LocalPolyFit fit;
  fit.anchor = x;
  fit.degree = degree;
  fit.bandwidth = h1;
  fit.effective_failures = lik.effective_failures();

  if (lik.effective_failures() == 0) {
    std::ostringstream msg;
    msg << "no failures inside the window at x=" << x << " (h=" << h1 << ")";
    throw DegenerateWindowError(msg.str(), x, 0);
  }
  if (lik.effective_failures() < degree + 1 || lik.distinct_values() < degree + 1) {
    std::ostringstream msg;
    msg << "degenerate local design at x=" << x << ": " << lik.effective_failures()
        << " failures and " << lik.distinct_values()
        << " distinct covariate values in window, need " << degree + 1;
    throw DegenerateWindowError(msg.str(), x, lik.effective_failures());
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(degree);
  auto current = lik.evaluate(theta);
  auto notify = [&](int iteration) {
    if (!options.observer) return;
    options.observer({iteration, theta, current.value, current.gradient, current.hessian});
  };
  notify(0);

  for (int it = 1;; ++it) {
    const double gnorm = current.gradient.norm();
    if (gnorm <= options.gradient_tolerance) {
      fit.converged = true;
      fit.iterations = it - 1;
      fit.gradient_norm = gnorm;
      break;
    }
    if (it > options.max_iterations) {
      std::ostringstream msg;
      msg << "local fit at x=" << x << " did not converge in "
          << options.max_iterations << " iterations (gradient norm " << gnorm << ")";
      throw ConvergenceError(msg.str());
    }

    const Eigen::MatrixXd info = -current.hessian;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    const Eigen::VectorXd pivots = ldlt.vectorD();
    const double largest = pivots.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() > 1e-13 * largest) ||
        !(largest > 0.0)) {
      std::ostringstream msg;
      msg << "singular local information matrix at x=" << x << " with "
          << lik.effective_failures() << " effective failures";
      throw DegenerateWindowError(msg.str(), x, lik.effective_failures());
    }
    const Eigen::VectorXd step = ldlt.solve(current.gradient);

    // Step halving until the concave objective does not decrease.
    const double floor = current.value - 1e-12 * (1.0 + std::abs(current.value));
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      Eigen::VectorXd trial = theta + t * step;
      auto eval = lik.evaluate(trial);
      if (std::isfinite(eval.value) && eval.value >= floor) {
        theta = std::move(trial);
        current = std::move(eval);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "line search failed at x=" << x << " (gradient norm " << gnorm << ")";
      throw ConvergenceError(msg.str());
    }
    notify(it);
  }

  fit.beta_star = lik.to_beta(theta);
  return fit;
}

std::vector<LocalPolyFit> fit_derivative_curve(
    const SurvivalDataset& data, std::span<const double> grid, int degree,
    double h1, const KernelSpec& kernel,
    const std::optional<VariableBandwidthRule>& rule,
    const LocalFitOptions& options, unsigned threads) {
  std::vector<LocalPolyFit> fits(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t g) {
    const double x = grid[g];
    const double h = rule ? rule->at(x) : h1;
    try {
      fits[g] = fit_local(data, x, degree, h, kernel, options);
    } catch (const EstimationError& e) {
      LocalPolyFit failed;
      failed.anchor = x;
      failed.degree = degree;
      failed.bandwidth = h;
      failed.converged = false;
      failed.diagnostic = e.what();
      if (const auto* dw = dynamic_cast<const DegenerateWindowError*>(&e)) {
        failed.effective_failures = dw->effective_failures();
      }
      fits[g] = std::move(failed);
    }
  });
  return fits;
}

IntegratedCurve::IntegratedCurve(std::vector<double> knots,
                                 std::vector<double> values, double x_ref)
    : knots_(std::move(knots)), values_(std::move(values)), x_ref_(x_ref) {}

bool IntegratedCurve::defined_at(double x) const {
  return x >= knots_.front() && x <= knots_.back();
}

double IntegratedCurve::operator()(double x) const {
  if (!defined_at(x)) {
    std::ostringstream msg;
    msg << "integrated curve undefined at x=" << x << ": a failed derivative fit lies "
        << "between the reference " << x_ref_ << " and x, or x is off the grid";
    throw EstimationError(msg.str());
  }
  if (x == x_ref_) return 0.0;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  if (it == knots_.end()) return values_.back();
  const std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - knots_[lo]) / (knots_[hi] - knots_[lo]);
  return values_[lo] + t * (values_[hi] - values_[lo]);
}

IntegratedCurve integrate_derivative(std::span<const LocalPolyFit> fits,
                                     double x_ref) {
  if (fits.size() < 2) throw InputError("integration needs fits at two or more points");
  for (std::size_t g = 1; g < fits.size(); ++g) {
    if (!(fits[g].anchor > fits[g - 1].anchor)) {
      throw InputError("derivative fits must be on a strictly increasing grid");
    }
  }
  if (x_ref < fits.front().anchor || x_ref > fits.back().anchor) {
    throw InputError("reference point lies outside the fitted grid");
  }

  auto ok = [&](std::size_t g) { return fits[g].converged && !fits[g].beta_star.empty(); };
  auto slope = [&](std::size_t g) { return fits[g].beta_star[0]; };

  // Cell containing x_ref: [left, right] with right == left when on a knot.
  std::size_t right = static_cast<std::size_t>(
      std::lower_bound(fits.begin(), fits.end(), x_ref,
                       [](const LocalPolyFit& f, double v) { return f.anchor < v; }) -
      fits.begin());
  const bool on_knot = fits[right].anchor == x_ref;
  const std::size_t left = on_knot ? right : right - 1;
  if (!ok(left) || !ok(right)) {
    std::ostringstream msg;
    msg << "derivative fit failed next to the reference point " << x_ref;
    throw EstimationError(msg.str());
  }

  std::size_t first = left;
  while (first > 0 && ok(first - 1)) --first;
  std::size_t last = right;
  while (last + 1 < fits.size() && ok(last + 1)) ++last;

  std::vector<double> knots;
  std::vector<double> slopes;
  for (std::size_t g = first; g <= left; ++g) {
    knots.push_back(fits[g].anchor);
    slopes.push_back(slope(g));
  }
  std::size_t ref = knots.size() - 1;
  if (!on_knot) {
    const double t = (x_ref - fits[left].anchor) / (fits[right].anchor - fits[left].anchor);
    knots.push_back(x_ref);
    slopes.push_back(slope(left) + t * (slope(right) - slope(left)));
    ref = knots.size() - 1;
  }
  for (std::size_t g = right + (on_knot ? 1 : 0); g <= last; ++g) {
    knots.push_back(fits[g].anchor);
    slopes.push_back(slope(g));
  }

  std::vector<double> values(knots.size(), 0.0);
  for (std::size_t k = ref + 1; k < knots.size(); ++k) {
    values[k] = values[k - 1] + 0.5 * (slopes[k] + slopes[k - 1]) * (knots[k] - knots[k - 1]);
  }
  for (std::size_t k = ref; k-- > 0;) {
    values[k] = values[k + 1] - 0.5 * (slopes[k] + slopes[k + 1]) * (knots[k + 1] - knots[k]);
  }
  return IntegratedCurve(std::move(knots), std::move(values), x_ref);
}

}  // namespace hazrisk
