#include "hazrisk/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "hazrisk/errors.hpp"
#include "hazrisk/grid.hpp"
#include "hazrisk/group_diff.hpp"
#include "hazrisk/local_fit.hpp"
#include "hazrisk/normal.hpp"
#include "hazrisk/parallel.hpp"
#include "hazrisk/relative_risk.hpp"

namespace hazrisk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// D3 mixture components: N(mean, 0.3^2) truncated to (lo, hi).
struct TruncatedComponent {
  double mean;
  double lo;
  double hi;
};
constexpr double kD3Sd = 0.3;
constexpr TruncatedComponent kD3Left{-0.6, -1.0, 0.0};
constexpr TruncatedComponent kD3Right{0.6, 0.0, 1.0};

double component_mass(const TruncatedComponent& c) {
  return normal_cdf((c.hi - c.mean) / kD3Sd) - normal_cdf((c.lo - c.mean) / kD3Sd);
}

double component_density(const TruncatedComponent& c, double x) {
  if (x < c.lo || x > c.hi) return 0.0;
  const double z = (x - c.mean) / kD3Sd;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * M_PI) * kD3Sd * component_mass(c));
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  // Split into panels first so narrow features are not stepped over.
  constexpr int kPanels = 64;
  double total = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double lo = a + (b - a) * k / kPanels;
    const double hi = a + (b - a) * (k + 1) / kPanels;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    total += adaptive_simpson(f, lo, hi, flo, fm, fhi, whole, 1e-13, 40);
  }
  return total;
}

}  // namespace

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::truncated_normal(double a, double b) {
  const double pa = normal_cdf(a);
  const double pb = normal_cdf(b);
  const double p = pa + uniform() * (pb - pa);
  return std::clamp(normal_quantile(p), a, b);
}

Rng replication_stream(std::uint64_t seed, std::uint64_t rep) {
  return Rng(splitmix64(seed ^ splitmix64(rep + 0x632BE59BD9B4E019ULL)));
}

double DesignSpec::psi(double x) const {
  const double cubic = x * x * x;
  if (id != DesignId::D2) return cubic;
  return cubic + std::exp(-150.0 * (x + 0.3) * (x + 0.3)) +
         std::exp(-150.0 * (x - 0.3) * (x - 0.3));
}

double DesignSpec::psi_derivative(double x) const {
  const double d = 3.0 * x * x;
  if (id != DesignId::D2) return d;
  return d - 300.0 * (x + 0.3) * std::exp(-150.0 * (x + 0.3) * (x + 0.3)) -
         300.0 * (x - 0.3) * std::exp(-150.0 * (x - 0.3) * (x - 0.3));
}

double DesignSpec::sample_covariate(Rng& rng) const {
  if (id != DesignId::D3) return rng.uniform(-1.0, 1.0);
  const TruncatedComponent& c = rng.uniform() < 0.5 ? kD3Left : kD3Right;
  const double z = rng.truncated_normal((c.lo - c.mean) / kD3Sd, (c.hi - c.mean) / kD3Sd);
  return std::clamp(c.mean + kD3Sd * z, c.lo, c.hi);
}

double DesignSpec::covariate_density(double x) const {
  if (id != DesignId::D3) return (x >= -1.0 && x <= 1.0) ? 0.5 : 0.0;
  return 0.5 * component_density(kD3Left, x) + 0.5 * component_density(kD3Right, x);
}

VariableBandwidthRule DesignSpec::bandwidth_rule(double h0) const {
  VariableBandwidthRule rule;
  rule.base = h0;
  if (id == DesignId::D2) rule.pieces.push_back({-0.5, 0.5, 0.8});
  if (id == DesignId::D3) rule.pieces.push_back({-0.2, 0.2, 2.0});
  rule.validate();
  return rule;
}

std::string DesignSpec::name() const {
  return "D" + std::to_string(static_cast<int>(id));
}

DesignSpec make_design(DesignId id) {
  DesignSpec d;
  d.id = id;
  d.anchor = id == DesignId::D3 ? -0.6 : 0.0;
  return d;
}

DesignSpec make_design(int id) {
  if (id < 1 || id > 3) throw InputError("design must be 1, 2 or 3");
  return make_design(static_cast<DesignId>(id));
}

SurvivalDataset generate_replication(const DesignSpec& design, int n,
                                     std::optional<double> censoring_scale, Rng& rng) {
  if (n < 1) throw InputError("sample size must be positive");
  if (censoring_scale && !(*censoring_scale > 0.0)) {
    throw InputError("censoring scale must be positive");
  }
  std::vector<SurvivalSample> samples(static_cast<std::size_t>(n));
  for (auto& s : samples) {
    s.x = design.sample_covariate(rng);
    // T = -log(U) / e^{psi}: exponential with rate e^{psi(X)}, i.e.
    // log T = -psi(X) + eps with eps standard extreme value.
    const double t = -std::log(rng.uniform()) / std::exp(design.psi(s.x));
    if (censoring_scale) {
      const double c = rng.uniform(0.0, *censoring_scale);
      s.time = std::min(t, c);
      s.status = t <= c ? 1 : 0;
    } else {
      s.time = t;
      s.status = 1;
    }
  }
  return SurvivalDataset(std::move(samples));
}

CovariateLaw covariate_law(const DesignSpec& design) {
  CovariateLaw law;
  law.psi = [design](double x) { return design.psi(x); };
  law.density = [design](double x) { return design.covariate_density(x); };
  law.breaks = design.id == DesignId::D3 ? std::vector<double>{-1.0, 0.0, 1.0}
                                         : std::vector<double>{-1.0, 1.0};
  return law;
}

double censoring_probability(const CovariateLaw& law, double c) {
  if (!(c > 0.0)) throw InputError("censoring scale must be positive");
  if (law.breaks.size() < 2) throw InputError("covariate law needs a support interval");
  auto integrand = [&](double x) {
    const double rate = c * std::exp(law.psi(x));
    return law.density(x) * (-std::expm1(-rate) / rate);
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < law.breaks.size(); ++k) {
    total += integrate(integrand, law.breaks[k], law.breaks[k + 1]);
  }
  return total;
}

double censoring_probability(const DesignSpec& design, double c) {
  return censoring_probability(covariate_law(design), c);
}

double calibrate_censoring(const CovariateLaw& law, double target, double tol) {
  if (!(target > 0.0 && target < 1.0)) {
    throw InputError("censoring target must lie in (0, 1)");
  }
  // P(T > C) falls from 1 at c -> 0 to 0 as c -> infinity.
  double lo = 1e-6;
  double hi = 1.0;
  if (censoring_probability(law, lo) < target) {
    throw EstimationError("censoring target unreachable: too close to 1");
  }
  while (censoring_probability(law, hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw EstimationError("censoring target unreachable: too close to 0");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (censoring_probability(law, mid) > target) lo = mid;
    else hi = mid;
  }
  const double c = 0.5 * (lo + hi);
  if (std::abs(censoring_probability(law, c) - target) > tol) {
    throw EstimationError("censoring calibration missed its tolerance");
  }
  return c;
}

double calibrate_censoring(const DesignSpec& design, double target, double tol) {
  return calibrate_censoring(covariate_law(design), target, tol);
}

void SimulationConfig::validate() const {
  if (reps < 1) throw InputError("reps must be at least 1");
  if (n < 50) throw InputError("n must be at least 50");
  if (!(censoring_target >= 0.0 && censoring_target < 1.0)) {
    throw InputError("censoring target must lie in [0, 1)");
  }
  if (!(h0 > 0.0)) throw InputError("h0 must be positive");
  if (p < 1 || p1 < p) throw InputError("need 1 <= p <= p1");
  if (!(h_ratio > 0.0 && h_ratio < 1.0)) throw InputError("h_ratio must lie in (0, 1)");
  for (double g : grid) {
    if (g < -1.0 || g > 1.0) throw InputError("grid must lie within [-1, 1]");
  }
  if (!std::is_sorted(grid.begin(), grid.end())) throw InputError("grid must be ascending");
}

std::vector<double> SimulationConfig::resolved_grid() const {
  std::vector<double> g = grid.empty() ? linspace(-1.0, 1.0, 101) : grid;
  // Snap or insert the anchor so both curves are pinned at a grid point.
  auto nearest = std::min_element(g.begin(), g.end(), [&](double a, double b) {
    return std::abs(a - design.anchor) < std::abs(b - design.anchor);
  });
  if (std::abs(*nearest - design.anchor) < 1e-9) {
    *nearest = design.anchor;
  } else {
    g.insert(std::upper_bound(g.begin(), g.end(), design.anchor), design.anchor);
  }
  return g;
}

std::vector<double> SimulationConfig::resolved_mse_points() const {
  return mse_points.empty() ? linspace(-1.0, 1.0, 11) : mse_points;
}

ReplicationCurves estimate_replication_curves(const SurvivalDataset& data,
                                              const SimulationConfig& config) {
  const auto grid = config.resolved_grid();
  const std::size_t anchor_index = static_cast<std::size_t>(
      std::find(grid.begin(), grid.end(), config.design.anchor) - grid.begin());
  const auto rule = config.design.bandwidth_rule(config.h0);

  const auto fits =
      fit_derivative_curve(data, grid, config.p1, config.h0, config.kernel, rule, {}, 1);

  ReplicationCurves curves;
  curves.fgk.assign(grid.size(), kNaN);
  curves.proposed.assign(grid.size(), kNaN);
  if (!fits[anchor_index].converged) return curves;

  const IntegratedCurve integrated = integrate_derivative(fits, config.design.anchor);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (integrated.defined_at(grid[g])) curves.fgk[g] = integrated(grid[g]);
  }

  EstimatorConfig est;
  est.p = config.p;
  est.p1 = config.p1;
  est.kernel = config.kernel;
  est.bandwidth_rule = rule;
  est.h_ratio = config.h_ratio;
  est.threads = 1;
  curves.proposed =
      anchored_alpha(data, config.design.anchor, fits[anchor_index], grid, fits, est);
  return curves;
}

SimulationReport run_study(const SimulationConfig& config, const CurveEstimator& estimator) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto grid = config.resolved_grid();
  const auto mse_points = config.resolved_mse_points();
  std::vector<std::size_t> mse_index;
  for (double x : mse_points) {
    auto it = std::min_element(grid.begin(), grid.end(), [&](double a, double b) {
      return std::abs(a - x) < std::abs(b - x);
    });
    if (std::abs(*it - x) > 1e-9) {
      throw InputError("MSE point " + std::to_string(x) + " is not on the grid");
    }
    mse_index.push_back(static_cast<std::size_t>(it - grid.begin()));
  }

  std::optional<double> scale;
  if (config.censoring_target > 0.0) {
    scale = calibrate_censoring(config.design, config.censoring_target);
  }

  SimulationConfig resolved = config;
  resolved.grid = grid;

  const auto reps = static_cast<std::size_t>(config.reps);
  std::vector<ReplicationCurves> results(reps);
  std::vector<double> censored_share(reps, 0.0);
  parallel_for(reps, config.threads, [&](std::size_t rep) {
    Rng rng = replication_stream(config.seed, rep);
    const SurvivalDataset data = generate_replication(config.design, config.n, scale, rng);
    censored_share[rep] =
        1.0 - static_cast<double>(data.failure_count()) / static_cast<double>(data.size());
    results[rep] = estimator ? estimator(data, resolved)
                             : estimate_replication_curves(data, resolved);
    if (results[rep].fgk.size() != grid.size() ||
        results[rep].proposed.size() != grid.size()) {
      throw EstimationError("curve estimator returned the wrong number of points");
    }
  });

  std::vector<double> truth(grid.size());
  const double base = config.design.psi(config.design.anchor);
  for (std::size_t g = 0; g < grid.size(); ++g) truth[g] = config.design.psi(grid[g]) - base;

  // Aggregation runs in replication order, so the report does not depend on
  // how replications were scheduled.
  struct Accumulator {
    double ise_sum = 0.0;
    int used = 0;
    int dropped = 0;
    std::vector<double> sq_sum, value_sum;
    std::vector<int> count;
  };
  auto make_acc = [&] {
    Accumulator a;
    a.sq_sum.assign(grid.size(), 0.0);
    a.value_sum.assign(grid.size(), 0.0);
    a.count.assign(grid.size(), 0);
    return a;
  };
  Accumulator fgk = make_acc();
  Accumulator proposed = make_acc();
  const std::size_t needed = (9 * grid.size() + 9) / 10;  // ceil(0.9 G)
  const double span = grid.back() - grid.front();

  auto absorb = [&](Accumulator& acc, const std::vector<double>& curve,
                    std::vector<double>& rep_ise) -> bool {
    std::size_t finite = 0;
    for (double v : curve) finite += std::isfinite(v) ? 1 : 0;
    if (finite < needed) {
      ++acc.dropped;
      rep_ise.push_back(kNaN);
      return false;
    }
    double ise = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (!std::isfinite(curve[g])) continue;
      const double err = curve[g] - truth[g];
      ise += err * err;
      acc.sq_sum[g] += err * err;
      acc.value_sum[g] += curve[g];
      ++acc.count[g];
    }
    rep_ise.push_back(span * ise / static_cast<double>(finite));
    acc.ise_sum += rep_ise.back();
    ++acc.used;
    return true;
  };

  SimulationReport report;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const bool a = absorb(fgk, results[rep].fgk, report.rep_ise_fgk);
    const bool b = absorb(proposed, results[rep].proposed, report.rep_ise_proposed);
    if (!a || !b) ++report.rep_failures;
  }

  const int limit = config.reps / 10;
  if (fgk.dropped > limit || proposed.dropped > limit) {
    std::ostringstream msg;
    msg << "too many failed replications for " << config.design.name() << " h0=" << config.h0
        << ": FGK dropped " << fgk.dropped << ", new dropped " << proposed.dropped << " of "
        << config.reps;
    throw EstimationError(msg.str());
  }

  report.design = config.design.name();
  report.n = config.n;
  report.reps = config.reps;
  report.censoring_target = config.censoring_target;
  report.censoring_scale = scale.value_or(0.0);
  double censored = 0.0;
  for (double s : censored_share) censored += s;
  report.observed_censoring = censored / static_cast<double>(reps);
  report.h0 = config.h0;
  report.seed = config.seed;
  report.grid_points = static_cast<int>(grid.size());
  report.mise_fgk = fgk.used > 0 ? fgk.ise_sum / fgk.used : kNaN;
  report.mise_proposed = proposed.used > 0 ? proposed.ise_sum / proposed.used : kNaN;
  report.fgk_failures = fgk.dropped;
  report.proposed_failures = proposed.dropped;

  for (std::size_t k = 0; k < mse_points.size(); ++k) {
    const std::size_t g = mse_index[k];
    PointMse pm;
    pm.x = grid[g];
    pm.fgk_count = fgk.count[g];
    pm.proposed_count = proposed.count[g];
    pm.fgk = pm.fgk_count > 0 ? fgk.sq_sum[g] / pm.fgk_count : kNaN;
    pm.proposed = pm.proposed_count > 0 ? proposed.sq_sum[g] / pm.proposed_count : kNaN;
    report.mse_by_point.push_back(pm);
  }

  report.grid = grid;
  report.truth = truth;
  report.mean_fgk.resize(grid.size());
  report.mean_proposed.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    report.mean_fgk[g] = fgk.count[g] > 0 ? fgk.value_sum[g] / fgk.count[g] : kNaN;
    report.mean_proposed[g] =
        proposed.count[g] > 0 ? proposed.value_sum[g] / proposed.count[g] : kNaN;
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

CoverageResult summarize(double truth, int reps, const std::vector<double>& estimates,
                         const std::vector<int>& covered) {
  CoverageResult r;
  r.truth = truth;
  r.reps = reps;
  double sum = 0.0;
  double sq = 0.0;
  int hits = 0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (!std::isfinite(estimates[k])) continue;
    ++r.successful;
    sum += estimates[k];
    sq += estimates[k] * estimates[k];
    hits += covered[k];
  }
  if (r.successful == 0) throw EstimationError("every replication failed");
  r.mean_estimate = sum / r.successful;
  const double var =
      r.successful > 1 ? (sq - r.successful * r.mean_estimate * r.mean_estimate) / (r.successful - 1)
                       : 0.0;
  r.mc_standard_error = std::sqrt(std::max(var, 0.0) / r.successful);
  r.coverage = static_cast<double>(hits) / r.successful;
  return r;
}

}  // namespace

CoverageResult relative_risk_coverage(const DesignSpec& design, double x1, double x2,
                                      int n, int reps, double censoring_target,
                                      const EstimatorConfig& config, std::uint64_t seed) {
  config.validate();
  if (reps < 1) throw InputError("reps must be at least 1");
  std::optional<double> scale;
  if (censoring_target > 0.0) scale = calibrate_censoring(design, censoring_target);
  EstimatorConfig inner = config;
  inner.threads = 1;
  const double truth = design.psi(x2) - design.psi(x1);

  std::vector<double> estimates(static_cast<std::size_t>(reps), kNaN);
  std::vector<int> covered(static_cast<std::size_t>(reps), 0);
  parallel_for(static_cast<std::size_t>(reps), config.threads, [&](std::size_t rep) {
    Rng rng = replication_stream(seed, rep);
    const SurvivalDataset data = generate_replication(design, n, scale, rng);
    try {
      const auto est = estimate_relative_risk(data, x1, x2, inner);
      estimates[rep] = est.alpha_hat;
      covered[rep] = est.ci.contains(truth) ? 1 : 0;
    } catch (const EstimationError&) {
      // counted as unsuccessful
    }
  });
  return summarize(truth, reps, estimates, covered);
}

SurvivalDataset generate_two_group(int n, double rho, std::optional<double> censoring_scale,
                                   Rng& rng) {
  if (n < 1) throw InputError("sample size must be positive");
  std::vector<SurvivalSample> samples(static_cast<std::size_t>(n));
  for (auto& s : samples) {
    s.x = rng.uniform(-1.0, 1.0);
    s.group = rng.uniform() < 0.5 ? 0 : 1;
    const double psi = s.x * s.x * s.x + (*s.group == 1 ? rho : 0.0);
    const double t = -std::log(rng.uniform()) / std::exp(psi);
    if (censoring_scale) {
      const double c = rng.uniform(0.0, *censoring_scale);
      s.time = std::min(t, c);
      s.status = t <= c ? 1 : 0;
    } else {
      s.time = t;
      s.status = 1;
    }
  }
  return SurvivalDataset(std::move(samples));
}

CoverageResult group_difference_coverage(double x, double rho, int n, int reps,
                                         std::optional<double> censoring_scale,
                                         const EstimatorConfig& config, std::uint64_t seed) {
  config.validate();
  if (reps < 1) throw InputError("reps must be at least 1");
  EstimatorConfig inner = config;
  inner.threads = 1;
  std::vector<double> estimates(static_cast<std::size_t>(reps), kNaN);
  std::vector<int> covered(static_cast<std::size_t>(reps), 0);
  parallel_for(static_cast<std::size_t>(reps), config.threads, [&](std::size_t rep) {
    Rng rng = replication_stream(seed, rep);
    const SurvivalDataset data = generate_two_group(n, rho, censoring_scale, rng);
    try {
      const auto est = estimate_group_difference(data, x, 0, 1, inner);
      estimates[rep] = est.rho_hat;
      covered[rep] = est.ci.contains(rho) ? 1 : 0;
    } catch (const EstimationError&) {
      // counted as unsuccessful
    }
  });
  return summarize(rho, reps, estimates, covered);
}

}  // namespace hazrisk
