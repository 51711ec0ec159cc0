#include "hazrisk/survival.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hazrisk/concave_solver.hpp"
#include "hazrisk/errors.hpp"

namespace hazrisk {

namespace {

void check_sample(const SurvivalSample& s, std::size_t position) {
  if (!std::isfinite(s.x)) {
    std::ostringstream msg;
    msg << "sample " << position << ": covariate is not finite";
    throw InputError(msg.str());
  }
  if (!(s.time > 0.0) || !std::isfinite(s.time)) {
    std::ostringstream msg;
    msg << "sample " << position << ": time must be positive and finite, got "
        << s.time;
    throw InputError(msg.str());
  }
  if (s.status != 0 && s.status != 1) {
    std::ostringstream msg;
    msg << "sample " << position << ": status must be 0 or 1, got " << s.status;
    throw InputError(msg.str());
  }
}

}  // namespace

SurvivalDataset::SurvivalDataset(std::vector<SurvivalSample> samples) {
  if (samples.empty()) throw InputError("dataset is empty");
  for (std::size_t i = 0; i < samples.size(); ++i) check_sample(samples[i], i);

  input_index_.resize(samples.size());
  std::iota(input_index_.begin(), input_index_.end(), std::size_t{0});
  std::stable_sort(input_index_.begin(), input_index_.end(),
                   [&](std::size_t a, std::size_t b) {
                     return samples[a].time < samples[b].time;
                   });
  samples_.reserve(samples.size());
  for (std::size_t idx : input_index_) samples_.push_back(samples[idx]);

  // Risk set of a failure at t starts at the first sample with time >= t.
  std::size_t block_start = 0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (i > 0 && samples_[i].time != samples_[i - 1].time) block_start = i;
    if (samples_[i].status == 1) {
      failure_index_.push_back(i);
      risk_start_.push_back(block_start);
    }
  }
  if (failure_index_.empty()) {
    throw InputError("dataset has no observed failures (all censored)");
  }

  auto [lo, hi] = std::minmax_element(
      samples_.begin(), samples_.end(),
      [](const SurvivalSample& a, const SurvivalSample& b) { return a.x < b.x; });
  min_x_ = lo->x;
  max_x_ = hi->x;
}

SurvivalDataset SurvivalDataset::filter_group(int group) const {
  std::vector<SurvivalSample> subset;
  for (const auto& s : samples_) {
    if (s.group && *s.group == group) subset.push_back(s);
  }
  if (subset.empty()) {
    throw InputError("group " + std::to_string(group) + " has no samples");
  }
  return SurvivalDataset(std::move(subset));
}

SurvivalDataset build_dataset(std::vector<SurvivalSample> samples) {
  return SurvivalDataset(std::move(samples));
}

StepFunction::StepFunction(std::vector<double> jump_times,
                           std::vector<double> values)
    : jump_times_(std::move(jump_times)), values_(std::move(values)) {
  if (jump_times_.size() != values_.size()) {
    throw InputError("step function needs one value per jump");
  }
}

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.begin()) return 0.0;
  return values_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
}

StepFunction breslow_baseline(const SurvivalDataset& data,
                              std::span<const double> risk_scores) {
  if (risk_scores.size() != data.size()) {
    throw InputError("breslow_baseline: one risk score per sample required");
  }
  for (double r : risk_scores) {
    if (!std::isfinite(r)) throw InputError("breslow_baseline: non-finite risk score");
  }

  // Suffix sums of exp(psi) give every risk-set denominator.
  std::vector<double> suffix(data.size() + 1, 0.0);
  for (std::size_t i = data.size(); i-- > 0;) {
    suffix[i] = suffix[i + 1] + std::exp(risk_scores[i]);
  }

  std::vector<double> times;
  std::vector<double> values;
  double cumulative = 0.0;
  const auto starts = data.risk_start();
  for (std::size_t j = 0; j < data.failure_count(); ++j) {
    cumulative += 1.0 / suffix[starts[j]];
    const double t = data.failure_time(j);
    if (!times.empty() && times.back() == t) {
      values.back() = cumulative;
    } else {
      times.push_back(t);
      values.push_back(cumulative);
    }
  }
  return StepFunction(std::move(times), std::move(values));
}

ArmLabels arms_from_covariate(const SurvivalDataset& data, double x1, double x2) {
  ArmLabels arms(data.size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].x == x1) arms[i] = 1;
    else if (data[i].x == x2) arms[i] = 2;
  }
  return arms;
}

ArmLabels arms_from_group(const SurvivalDataset& data, int z1, int z2) {
  ArmLabels arms(data.size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].group) continue;
    if (*data[i].group == z1) arms[i] = 1;
    else if (*data[i].group == z2) arms[i] = 2;
  }
  return arms;
}

TwoSampleLikelihood::TwoSampleLikelihood(const SurvivalDataset& data,
                                         const ArmLabels& arms) {
  if (arms.size() != data.size()) {
    throw InputError("two-sample likelihood: one arm label per sample required");
  }
  std::vector<double> count1(data.size() + 1, 0.0);
  std::vector<double> count2(data.size() + 1, 0.0);
  for (std::size_t i = data.size(); i-- > 0;) {
    count1[i] = count1[i + 1] + (arms[i] == 1 ? 1.0 : 0.0);
    count2[i] = count2[i + 1] + (arms[i] == 2 ? 1.0 : 0.0);
  }
  const auto starts = data.risk_start();
  const auto failures = data.failure_index();
  for (std::size_t j = 0; j < data.failure_count(); ++j) {
    const int arm = arms[failures[j]];
    if (arm == 0) continue;
    failing_arm.push_back(arm);
    at_risk1.push_back(count1[starts[j]]);
    at_risk2.push_back(count2[starts[j]]);
  }
}

double TwoSampleLikelihood::value(double alpha) const {
  double total = 0.0;
  for (std::size_t j = 0; j < failing_arm.size(); ++j) {
    if (failing_arm[j] == 2) total += alpha;
    total -= std::log(at_risk1[j] + at_risk2[j] * std::exp(alpha));
  }
  return total;
}

double TwoSampleLikelihood::score(double alpha) const {
  double total = 0.0;
  for (std::size_t j = 0; j < failing_arm.size(); ++j) {
    const double e2 = at_risk2[j] * std::exp(alpha);
    total += (failing_arm[j] == 2 ? 1.0 : 0.0) - e2 / (at_risk1[j] + e2);
  }
  return total;
}

double TwoSampleLikelihood::curvature(double alpha) const {
  double total = 0.0;
  for (std::size_t j = 0; j < failing_arm.size(); ++j) {
    const double e2 = at_risk2[j] * std::exp(alpha);
    const double share = e2 / (at_risk1[j] + e2);
    total -= share * (1.0 - share);
  }
  return total;
}

TwoSampleFit two_sample_partial_likelihood_mle(const SurvivalDataset& data,
                                               const ArmLabels& arms) {
  const TwoSampleLikelihood lik(data, arms);

  // The score tends to d2 - #{j : arm 2 at risk} as alpha -> +inf and to
  // d2 - #{j : arm 1 not at risk} as alpha -> -inf; a finite root needs the
  // first limit negative and the second positive.
  double d2 = 0.0;
  double upper_limit = 0.0;
  double lower_limit = 0.0;
  for (std::size_t j = 0; j < lik.failing_arm.size(); ++j) {
    if (lik.failing_arm[j] == 2) d2 += 1.0;
    if (lik.at_risk2[j] > 0.0) upper_limit += 1.0;
    if (lik.at_risk1[j] == 0.0) lower_limit += 1.0;
  }
  if (lik.failing_arm.empty() || !(d2 - upper_limit < 0.0) ||
      !(d2 - lower_limit > 0.0)) {
    throw DivergenceError(
        "two-sample partial likelihood is monotone: no finite maximizer");
  }

  const auto result = maximize_concave_1d(
      [&](double a) { return lik.score(a); },
      [&](double a) { return lik.curvature(a); }, 0.0, 1e-12);
  TwoSampleFit fit;
  fit.alpha = result.argmax;
  fit.log_lik = lik.value(result.argmax);
  fit.information = -lik.curvature(result.argmax);
  fit.iterations = result.iterations;
  return fit;
}

}  // namespace hazrisk
