#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hazrisk {

struct SurvivalSample {
  double x = 0.0;       // covariate
  double time = 0.0;    // observed time min(T, C), > 0
  int status = 0;       // 1 = failure observed, 0 = censored
  std::optional<int> group;
};

// Immutable, time-sorted collection of samples.
//
// Samples are stored in ascending time order (stable on input order for
// equal times). Because of the ordering, the risk set {i : Y_i >= t} of a
// failure is always a suffix of the sample vector; it is represented by the
// index where that suffix starts. Tied failure times share the same risk
// set (Breslow convention) and a censoring tied with a failure stays in the
// failure's risk set.
class SurvivalDataset {
 public:
  // Throws InputError on empty input, invalid samples, or no failures.
  explicit SurvivalDataset(std::vector<SurvivalSample> samples);

  std::size_t size() const { return samples_.size(); }
  std::size_t failure_count() const { return failure_index_.size(); }

  std::span<const SurvivalSample> samples() const { return samples_; }
  const SurvivalSample& operator[](std::size_t i) const { return samples_[i]; }

  // Position in the original input of sorted sample i.
  std::size_t input_index(std::size_t i) const { return input_index_[i]; }

  // Sorted-sample index of each failure, ordered by time.
  std::span<const std::size_t> failure_index() const { return failure_index_; }

  // First sorted index of the risk set of failure j; members are
  // [risk_start(j), size()).
  std::span<const std::size_t> risk_start() const { return risk_start_; }

  double failure_time(std::size_t j) const {
    return samples_[failure_index_[j]].time;
  }
  std::size_t risk_set_size(std::size_t j) const {
    return samples_.size() - risk_start_[j];
  }

  double min_x() const { return min_x_; }
  double max_x() const { return max_x_; }

  // Subset holding only samples with the given group label.
  SurvivalDataset filter_group(int group) const;

 private:
  std::vector<SurvivalSample> samples_;
  std::vector<std::size_t> input_index_;
  std::vector<std::size_t> failure_index_;
  std::vector<std::size_t> risk_start_;
  double min_x_ = 0.0;
  double max_x_ = 0.0;
};

SurvivalDataset build_dataset(std::vector<SurvivalSample> samples);

// Right-continuous step function with jumps at distinct failure times.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> jump_times, std::vector<double> values);

  double operator()(double t) const;

  std::span<const double> jump_times() const { return jump_times_; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> jump_times_;
  std::vector<double> values_;
};

// Breslow estimator of the cumulative baseline hazard given risk scores
// psi(X_i), indexed in dataset (sorted) order.
StepFunction breslow_baseline(const SurvivalDataset& data,
                              std::span<const double> risk_scores);

// Which of the two samples a subject belongs to: 0 = excluded, 1 or 2.
using ArmLabels = std::vector<int>;

ArmLabels arms_from_covariate(const SurvivalDataset& data, double x1, double x2);
ArmLabels arms_from_group(const SurvivalDataset& data, int z1, int z2);

struct TwoSampleFit {
  double alpha = 0.0;        // log hazard ratio of arm 2 relative to arm 1
  double log_lik = 0.0;
  double information = 0.0;  // observed information at alpha
  int iterations = 0;
};

// Log partial likelihood of the two-sample proportional hazards model and its
// first two derivatives in alpha. Subjects with arm 0 are ignored.
struct TwoSampleLikelihood {
  TwoSampleLikelihood(const SurvivalDataset& data, const ArmLabels& arms);

  double value(double alpha) const;
  double score(double alpha) const;
  double curvature(double alpha) const;

  // Per failure: arm of the failing subject and arm counts in its risk set.
  std::vector<int> failing_arm;
  std::vector<double> at_risk1;
  std::vector<double> at_risk2;
};

// Maximizer of the two-sample partial likelihood. Throws DivergenceError
// when the likelihood is monotone.
TwoSampleFit two_sample_partial_likelihood_mle(const SurvivalDataset& data,
                                               const ArmLabels& arms);

}  // namespace hazrisk
