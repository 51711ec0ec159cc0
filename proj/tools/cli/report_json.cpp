#include "report_json.hpp"

#include <cmath>

namespace hazrisk::cli {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const RelativeRiskEstimate& est) {
  return {
      {"x1", est.x1},
      {"x2", est.x2},
      {"alpha", number(est.alpha_hat)},
      {"bias", number(est.bias_hat)},
      {"sigma2", number(est.sigma2_hat)},
      {"se", number(est.se_hat)},
      {"ci_level", est.ci_level},
      {"lo", number(est.ci.lo)},
      {"hi", number(est.ci.hi)},
      {"h", est.h},
      {"converged", est.converged},
      {"bias_unavailable", est.bias_unavailable},
      {"diagnostic", est.diagnostic},
  };
}

json to_json(const GroupDiffEstimate& est) {
  return {
      {"x", est.x},
      {"z1", est.z1},
      {"z2", est.z2},
      {"rho", number(est.rho_hat)},
      {"bias", number(est.bias_hat)},
      {"bias_smoothed", number(est.bias_smoothed)},
      {"sigma2", number(est.sigma2_hat)},
      {"se", number(est.se_hat)},
      {"ci_level", est.ci_level},
      {"lo", number(est.ci.lo)},
      {"hi", number(est.ci.hi)},
      {"h", est.h},
      {"n1_eff", est.n1_eff},
      {"n2_eff", est.n2_eff},
      {"window_censoring", number(est.window_censoring)},
      {"converged", est.converged},
      {"bias_unavailable", est.bias_unavailable},
      {"diagnostic", est.diagnostic},
  };
}

json to_json(const LocalPolyFit& fit) {
  json beta = json::array();
  for (double b : fit.beta_star) beta.push_back(number(b));
  return {
      {"x", fit.anchor},
      {"degree", fit.degree},
      {"h1", fit.bandwidth},
      {"beta", beta},
      {"converged", fit.converged},
      {"effective_failures", fit.effective_failures},
      {"iterations", fit.iterations},
      {"diagnostic", fit.diagnostic},
  };
}

json to_json(const EstimatorConfig& config) {
  json j = {
      {"p", config.p},
      {"p1", config.p1},
      {"kernel", kernel_name(config.kernel)},
      {"ci_level", config.ci_level},
      {"bias_correction", config.bias_correction},
      {"smooth_bias", config.smooth_bias},
  };
  if (config.bandwidth_rule) {
    j["h_rule"] = config.bandwidth_rule->to_string();
    j["h_ratio"] = config.h_ratio;
  } else {
    j["h"] = config.h;
    j["h1"] = config.h1;
  }
  return j;
}

json to_json(const SimulationReport& report, const SimulationConfig& config) {
  json points = json::array();
  for (const auto& pm : report.mse_by_point) {
    points.push_back({
        {"x", pm.x},
        {"mse_fgk", number(pm.fgk)},
        {"mse_new", number(pm.proposed)},
        {"rmse_fgk", number(std::sqrt(pm.fgk))},
        {"rmse_new", number(std::sqrt(pm.proposed))},
        {"count_fgk", pm.fgk_count},
        {"count_new", pm.proposed_count},
    });
  }
  json curves = json::array();
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    curves.push_back({
        {"x", report.grid[g]},
        {"truth", number(report.truth[g])},
        {"mean_fgk", number(report.mean_fgk[g])},
        {"mean_new", number(report.mean_proposed[g])},
    });
  }
  return {
      {"design", report.design},
      {"anchor", config.design.anchor},
      {"n", report.n},
      {"reps", report.reps},
      {"seed", report.seed},
      {"censoring_target", report.censoring_target},
      {"censoring_scale", report.censoring_scale > 0.0 ? json(report.censoring_scale)
                                                      : json(nullptr)},
      {"observed_censoring", report.observed_censoring},
      {"h0", report.h0},
      {"h_rule", config.design.bandwidth_rule(config.h0).to_string()},
      {"p", config.p},
      {"p1", config.p1},
      {"h_ratio", config.h_ratio},
      {"kernel", kernel_name(config.kernel)},
      {"grid_points", report.grid_points},
      {"mise_fgk", number(report.mise_fgk)},
      {"mise_new", number(report.mise_proposed)},
      {"mse_by_point", points},
      {"coverage", report.coverage ? json(*report.coverage) : json(nullptr)},
      {"failures",
       {{"fgk", report.fgk_failures},
        {"new", report.proposed_failures},
        {"any", report.rep_failures}}},
      {"curves", curves},
  };
}

}  // namespace hazrisk::cli
