#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hazrisk/bandwidth.hpp"
#include "hazrisk/csv_io.hpp"
#include "hazrisk/errors.hpp"
#include "hazrisk/grid.hpp"
#include "hazrisk/group_diff.hpp"
#include "hazrisk/local_fit.hpp"
#include "hazrisk/parallel.hpp"
#include "hazrisk/relative_risk.hpp"
#include "hazrisk/simulation.hpp"
#include "report_json.hpp"
#include "text_table.hpp"

namespace hazrisk::cli {

namespace {

using nlohmann::json;

constexpr double kWindowCensoringWarning = 0.8;

struct EstimatorFlags {
  int p = 1;
  int p1 = 2;
  double h = 0.2;
  double h1 = 0.25;
  std::string h_rule;
  double h_ratio = 0.8;
  std::string kernel = "epanechnikov";
  double ci_level = 0.95;
  bool no_bias = false;
  bool no_smooth = false;
  unsigned threads = 0;

  EstimatorConfig build() const {
    EstimatorConfig c;
    c.p = p;
    c.p1 = p1;
    c.h = h;
    c.h1 = h1;
    c.kernel = parse_kernel(kernel);
    c.ci_level = ci_level;
    c.bias_correction = !no_bias;
    c.smooth_bias = !no_smooth;
    if (!h_rule.empty()) {
      c.bandwidth_rule = VariableBandwidthRule::parse(h_rule);
      c.h_ratio = h_ratio;
    }
    c.threads = threads;
    c.validate();
    return c;
  }
};

struct OutputFlags {
  std::string json_path;
  std::string csv_path;
};

void add_estimator_flags(CLI::App* cmd, EstimatorFlags& f) {
  cmd->add_option("--p", f.p, "Degree of the second-step local polynomial")->capture_default_str();
  cmd->add_option("--p1", f.p1, "Degree of the first-step derivative fits")->capture_default_str();
  cmd->add_option("--h", f.h, "Second-step bandwidth")->capture_default_str();
  cmd->add_option("--h1", f.h1, "First-step bandwidth")->capture_default_str();
  cmd->add_option("--h-rule", f.h_rule,
                  "Variable first-step bandwidth: const:<h> or piecewise:<h>,<lo>:<hi>=<m>,...");
  cmd->add_option("--h-ratio", f.h_ratio, "Second-step bandwidth as a share of --h-rule")
      ->capture_default_str();
  cmd->add_option("--kernel", f.kernel, "epanechnikov, uniform or triangular")
      ->capture_default_str();
  cmd->add_option("--ci-level", f.ci_level, "Confidence level")->capture_default_str();
  cmd->add_flag("--no-bias", f.no_bias, "Skip the bias correction of the intervals");
  cmd->add_flag("--no-smooth-bias", f.no_smooth, "Use the raw pointwise group bias");
  cmd->add_option("--threads", f.threads, "Worker threads (0: HAZRISK_THREADS or all cores)");
}

void add_output_flags(CLI::App* cmd, OutputFlags& f) {
  cmd->add_option("--out", f.json_path, "Write a JSON report to this path");
  cmd->add_option("--csv", f.csv_path, "Write tidy plot data as CSV to this path");
}

// "lo:hi:count"
std::vector<double> parse_grid(const std::string& text) {
  double lo = 0.0, hi = 0.0;
  int count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || !in.eof()) {
    throw InputError("grid must look like lo:hi:count, got '" + text + "'");
  }
  if (count < 2 || !(hi > lo)) throw InputError("grid needs hi > lo and count >= 2");
  return linspace(lo, hi, static_cast<std::size_t>(count));
}

std::vector<double> resolve_grid(const std::string& text, const SurvivalDataset& data) {
  if (!text.empty()) return parse_grid(text);
  return linspace(data.min_x(), data.max_x(), 101);
}

SurvivalDataset load(const std::string& path) {
  return build_dataset(read_survival_csv_file(path));
}

void write_json(const std::string& path, const json& doc) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out.precision(17);
  return out;
}

void csv_value(std::ostream& out, double v) {
  if (std::isfinite(v)) out << v;
  else out << "NA";
}

// ---------------------------------------------------------------- fit-curve

struct FitCurveFlags {
  std::string input;
  std::string grid;
  std::optional<double> anchor;
  int degree = 2;
  double h1 = 0.25;
  std::string h_rule;
  std::string kernel = "epanechnikov";
  unsigned threads = 0;
  OutputFlags output;
};

int cmd_fit_curve(const FitCurveFlags& f, std::ostream& out, std::ostream& err) {
  const SurvivalDataset data = load(f.input);
  const auto grid = resolve_grid(f.grid, data);
  const KernelSpec kernel = parse_kernel(f.kernel);
  std::optional<VariableBandwidthRule> rule;
  if (!f.h_rule.empty()) rule = VariableBandwidthRule::parse(f.h_rule);
  if (f.degree < 1) throw InputError("--degree must be at least 1");
  if (!rule && !(f.h1 > 0.0)) throw InputError("--h1 must be positive");
  const double anchor = f.anchor.value_or(grid[grid.size() / 2]);

  const auto fits = fit_derivative_curve(data, grid, f.degree, f.h1, kernel, rule, {}, f.threads);
  std::optional<IntegratedCurve> curve;
  try {
    curve = integrate_derivative(fits, anchor);
  } catch (const EstimationError& e) {
    err << "warning: no integrated curve: " << e.what() << '\n';
  }

  int failed = 0;
  json records = json::array();
  TextTable table({"x", "h1", "psi'", "psi(x)-psi(anchor)", "status"});
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& fit = fits[g];
    const double slope = fit.converged ? fit.derivative(1) : NAN;
    const double level =
        curve && curve->defined_at(grid[g]) ? (*curve)(grid[g]) : NAN;
    failed += fit.converged ? 0 : 1;
    json rec = to_json(fit);
    rec["derivative"] = number(slope);
    rec["psi_diff"] = number(level);
    records.push_back(rec);
    table.add_row({fmt(grid[g]), fmt(fit.bandwidth), fmt(slope), fmt(level),
                   fit.converged ? "ok" : fit.diagnostic});
  }
  out << "derivative curve, degree " << f.degree << ", anchor " << fmt(anchor) << ", n = "
      << data.size() << '\n';
  table.print(out);
  if (failed == static_cast<int>(grid.size())) {
    throw EstimationError("local fit failed at every grid point");
  }

  write_json(f.output.json_path,
             {{"command", "fit-curve"},
              {"n", data.size()},
              {"anchor", anchor},
              {"degree", f.degree},
              {"kernel", kernel_name(kernel)},
              {"h_rule", rule ? rule->to_string() : VariableBandwidthRule::constant(f.h1).to_string()},
              {"failed_points", failed},
              {"points", records}});
  if (!f.output.csv_path.empty()) {
    auto csv = open_csv(f.output.csv_path);
    csv << "x,derivative,estimate\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
      csv << grid[g] << ',';
      csv_value(csv, records[g]["derivative"].is_null() ? NAN : records[g]["derivative"].get<double>());
      csv << ',';
      csv_value(csv, records[g]["psi_diff"].is_null() ? NAN : records[g]["psi_diff"].get<double>());
      csv << '\n';
    }
  }
  return kOk;
}

// ----------------------------------------------------------------- rel-risk

struct RelRiskFlags {
  std::string input;
  double x1 = 0.0;
  std::optional<double> x2;
  std::optional<double> x3;
  std::string grid;
  EstimatorFlags est;
  OutputFlags output;
};

void add_estimate_row(TextTable& table, const RelativeRiskEstimate& e) {
  table.add_row({fmt(e.x2), fmt(e.alpha_hat), fmt(e.bias_hat), fmt(e.se_hat), fmt(e.ci.lo),
                 fmt(e.ci.hi), e.converged ? "ok" : e.diagnostic});
}

int cmd_rel_risk(const RelRiskFlags& f, std::ostream& out, std::ostream& err) {
  const EstimatorConfig config = f.est.build();
  const SurvivalDataset data = load(f.input);
  if (f.x3 && !f.x2) throw InputError("--x3 needs --x2");

  std::vector<RelativeRiskEstimate> estimates;
  if (f.x2) {
    estimates.push_back(estimate_relative_risk(data, f.x1, *f.x2, config));
  } else {
    const auto grid = resolve_grid(f.grid, data);
    estimates = estimate_curve(data, f.x1, grid, config).estimates;
  }

  TextTable table({"x2", "alpha", "bias", "se", "lo", "hi", "status"});
  json records = json::array();
  int failed = 0;
  for (const auto& e : estimates) {
    add_estimate_row(table, e);
    records.push_back(to_json(e));
    if (!e.converged) {
      ++failed;
      err << "warning: x2=" << fmt(e.x2) << ": " << e.diagnostic << '\n';
    }
  }
  out << "relative risk psi(x2) - psi(x1), x1 = " << fmt(f.x1) << ", n = " << data.size()
      << ", " << fmt(100.0 * config.ci_level, 1) << "% intervals\n";
  table.print(out);
  if (failed == static_cast<int>(estimates.size())) {
    throw EstimationError("estimation failed at every point against anchor " + fmt(f.x1));
  }

  json doc = {{"command", "rel-risk"},
              {"n", data.size()},
              {"x1", f.x1},
              {"config", to_json(config)},
              {"failed_points", failed},
              {"estimates", records}};
  if (f.x3) {
    const double chained = estimate_alpha_chained(data, f.x1, *f.x3, *f.x2, config);
    out << "chained through x3 = " << fmt(*f.x3) << ": " << fmt(chained) << '\n';
    doc["chained"] = {{"x3", *f.x3}, {"alpha", number(chained)}};
  }
  write_json(f.output.json_path, doc);
  if (!f.output.csv_path.empty()) {
    auto csv = open_csv(f.output.csv_path);
    csv << "x,estimate,lo,hi\n";
    for (const auto& e : estimates) {
      csv << e.x2 << ',';
      csv_value(csv, e.alpha_hat);
      csv << ',';
      csv_value(csv, e.ci.lo);
      csv << ',';
      csv_value(csv, e.ci.hi);
      csv << '\n';
    }
  }
  return kOk;
}

// --------------------------------------------------------------- group-diff

struct GroupDiffFlags {
  std::string input;
  int z1 = 0;
  int z2 = 1;
  std::optional<double> x;
  std::string grid;
  EstimatorFlags est;
  OutputFlags output;
};

void check_groups(const SurvivalDataset& data, int z1, int z2) {
  if (z1 == z2) throw InputError("--z1 and --z2 must differ");
  int n1 = 0, n2 = 0;
  for (const auto& s : data.samples()) {
    if (!s.group) throw InputError("CSV lacks a 'group' column");
    n1 += *s.group == z1 ? 1 : 0;
    n2 += *s.group == z2 ? 1 : 0;
  }
  if (n1 == 0) throw InputError("group " + std::to_string(z1) + " is absent from the data");
  if (n2 == 0) throw InputError("group " + std::to_string(z2) + " is absent from the data");
}

int cmd_group_diff(const GroupDiffFlags& f, std::ostream& out, std::ostream& err) {
  const EstimatorConfig config = f.est.build();
  const SurvivalDataset data = load(f.input);
  check_groups(data, f.z1, f.z2);

  std::vector<GroupDiffEstimate> estimates;
  if (f.x) {
    estimates.push_back(estimate_group_difference(data, *f.x, f.z1, f.z2, config));
  } else {
    estimates =
        estimate_group_difference_curve(data, resolve_grid(f.grid, data), f.z1, f.z2, config);
  }

  TextTable table({"x", "rho", "bias", "se", "lo", "hi", "n1", "n2", "cens", "status"});
  json records = json::array();
  int failed = 0;
  for (const auto& e : estimates) {
    table.add_row({fmt(e.x), fmt(e.rho_hat), fmt(e.bias_smoothed), fmt(e.se_hat), fmt(e.ci.lo),
                   fmt(e.ci.hi), std::to_string(e.n1_eff), std::to_string(e.n2_eff),
                   fmt(e.window_censoring, 2), e.converged ? "ok" : e.diagnostic});
    records.push_back(to_json(e));
    if (!e.converged) {
      ++failed;
      err << "warning: x=" << fmt(e.x) << ": " << e.diagnostic << '\n';
    } else if (e.window_censoring > kWindowCensoringWarning) {
      err << "warning: x=" << fmt(e.x) << ": " << fmt(100.0 * e.window_censoring, 0)
          << "% of the windowed samples are censored; the estimate is unreliable\n";
    }
  }
  out << "group difference psi(x, " << f.z2 << ") - psi(x, " << f.z1 << "), n = "
      << data.size() << ", " << fmt(100.0 * config.ci_level, 1) << "% intervals\n";
  table.print(out);
  if (failed == static_cast<int>(estimates.size())) {
    throw EstimationError("estimation failed at every point");
  }

  write_json(f.output.json_path, {{"command", "group-diff"},
                                  {"n", data.size()},
                                  {"z1", f.z1},
                                  {"z2", f.z2},
                                  {"config", to_json(config)},
                                  {"failed_points", failed},
                                  {"estimates", records}});
  if (!f.output.csv_path.empty()) {
    auto csv = open_csv(f.output.csv_path);
    csv << "x,estimate,lo,hi\n";
    for (const auto& e : estimates) {
      csv << e.x << ',';
      csv_value(csv, e.rho_hat);
      csv << ',';
      csv_value(csv, e.ci.lo);
      csv << ',';
      csv_value(csv, e.ci.hi);
      csv << '\n';
    }
  }
  return kOk;
}

// ----------------------------------------------------------------- simulate

struct SimulateFlags {
  int design = 1;
  int n = 300;
  int reps = 500;
  double censoring = 0.0;
  double h0 = 0.25;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int p = 1;
  int p1 = 1;
  double h_ratio = 0.8;
  std::string kernel = "epanechnikov";
  unsigned threads = 0;
  bool table1 = false;
  std::string coverage_pair;
  std::string reps_csv;
  OutputFlags output;
};

SimulationConfig make_simulation(const SimulateFlags& f, int design, double censoring,
                                 double h0, std::uint64_t seed) {
  SimulationConfig c;
  c.design = make_design(design);
  c.n = f.n;
  c.reps = f.reps;
  c.censoring_target = censoring;
  c.h0 = h0;
  c.seed = seed;
  c.p = f.p;
  c.p1 = f.p1;
  c.h_ratio = f.h_ratio;
  c.kernel = parse_kernel(f.kernel);
  c.threads = f.threads;
  c.validate();
  return c;
}

void print_report(const SimulationReport& r, std::ostream& out) {
  out << r.design << ", n = " << r.n << ", reps = " << r.reps << ", h0 = " << fmt(r.h0, 2)
      << ", censoring target " << fmt(r.censoring_target, 2) << " (observed "
      << fmt(r.observed_censoring, 3) << "), seed " << r.seed << '\n';
  out << "MISE  FGK " << fmt(r.mise_fgk) << "  new " << fmt(r.mise_proposed)
      << "   dropped replications: FGK " << r.fgk_failures << ", new " << r.proposed_failures
      << '\n';
  if (r.coverage) out << "CI coverage " << fmt(*r.coverage, 3) << '\n';
  TextTable table({"x", "MSE FGK", "MSE new", "RMSE FGK", "RMSE new"});
  for (const auto& pm : r.mse_by_point) {
    table.add_row({fmt(pm.x, 2), fmt(pm.fgk), fmt(pm.proposed), fmt(std::sqrt(pm.fgk), 3),
                   fmt(std::sqrt(pm.proposed), 3)});
  }
  table.print(out);
  out << "runtime " << fmt(r.runtime_seconds, 2) << " s\n";
}

std::pair<double, double> parse_pair(const std::string& text) {
  double a = 0.0, b = 0.0;
  char comma = 0;
  std::istringstream in(text);
  if (!(in >> a >> comma >> b) || comma != ',' || !in.eof()) {
    throw InputError("expected x1,x2, got '" + text + "'");
  }
  return {a, b};
}

int cmd_simulate(SimulateFlags f, std::ostream& out, std::ostream& err) {
  if (!f.seed_given) {
    f.seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
    err << "seed: " << f.seed << '\n';
  }

  if (f.table1) {
    const double h0s[] = {0.15, 0.25, 0.35};
    const double cens[] = {0.0, 0.3};
    json cells = json::array();
    TextTable table({"h0", "censoring", "D1 FGK", "D1 new", "D2 FGK", "D2 new", "D3 FGK",
                     "D3 new"});
    for (double h0 : h0s) {
      for (double c : cens) {
        std::vector<std::string> row{fmt(h0, 2), fmt(100.0 * c, 0) + "%"};
        for (int d = 1; d <= 3; ++d) {
          const auto config = make_simulation(f, d, c, h0, f.seed);
          const auto report = run_study(config);
          row.push_back(fmt(report.mise_fgk, 3));
          row.push_back(fmt(report.mise_proposed, 3));
          cells.push_back(to_json(report, config));
        }
        table.add_row(row);
      }
    }
    out << "Mean integrated squared errors, n = " << f.n << ", reps = " << f.reps << ", seed "
        << f.seed << '\n';
    table.print(out);
    write_json(f.output.json_path, {{"command", "simulate"}, {"table1", cells}});
    return kOk;
  }

  const auto config = make_simulation(f, f.design, f.censoring, f.h0, f.seed);
  auto report = run_study(config);
  if (!f.coverage_pair.empty()) {
    const auto [x1, x2] = parse_pair(f.coverage_pair);
    EstimatorConfig est;
    est.p = f.p;
    est.p1 = std::max(f.p1, f.p + 1);
    est.kernel = config.kernel;
    est.bandwidth_rule = config.design.bandwidth_rule(f.h0);
    est.h_ratio = f.h_ratio;
    est.threads = f.threads;
    report.coverage = relative_risk_coverage(config.design, x1, x2, f.n, f.reps, f.censoring,
                                             est, f.seed)
                          .coverage;
  }
  print_report(report, out);

  write_json(f.output.json_path, to_json(report, config));
  if (!f.output.csv_path.empty()) {
    auto csv = open_csv(f.output.csv_path);
    csv << "x,truth,mean_fgk,mean_new\n";
    for (std::size_t g = 0; g < report.grid.size(); ++g) {
      csv << report.grid[g] << ',' << report.truth[g] << ',';
      csv_value(csv, report.mean_fgk[g]);
      csv << ',';
      csv_value(csv, report.mean_proposed[g]);
      csv << '\n';
    }
  }
  if (!f.reps_csv.empty()) {
    auto csv = open_csv(f.reps_csv);
    csv << "rep,ise_fgk,ise_new\n";
    for (std::size_t r = 0; r < report.rep_ise_fgk.size(); ++r) {
      csv << r << ',';
      csv_value(csv, report.rep_ise_fgk[r]);
      csv << ',';
      csv_value(csv, report.rep_ise_proposed[r]);
      csv << '\n';
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- bandwidth

struct BandwidthFlags {
  int p = 1;
  std::string kernel = "epanechnikov";
  std::string target = "rel-risk";
  std::optional<double> variance_integral;
  std::optional<double> curvature_integral;
  std::optional<long> n;
  std::string input;
  double pilot_h = 0.25;
  int z1 = 0;
  int z2 = 1;
  std::string output_json;
};

// Curvature plug-in from pilot fits of degree p+2, uniform weight over the
// data range. Grid points whose pilot fit failed are left out.
double pilot_curvature(const BandwidthFlags& f, const KernelSpec& kernel) {
  const SurvivalDataset data = load(f.input);
  const auto grid = linspace(data.min_x(), data.max_x(), 101);
  const double width = data.max_x() - data.min_x();
  auto weight = [width](double) { return 1.0 / width; };
  auto derivative_curve = [&](const SurvivalDataset& subset) {
    const auto fits = fit_derivative_curve(subset, grid, f.p + 2, f.pilot_h, kernel, {}, {}, 0);
    std::vector<double> d(grid.size(), NAN);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (fits[g].converged) d[g] = fits[g].derivative(f.p + 1);
    }
    return d;
  };
  auto keep = [&](const std::vector<double>& a, const std::vector<double>& b,
                  std::vector<double>& xs, std::vector<double>& da, std::vector<double>& db) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (std::isfinite(a[g]) && std::isfinite(b[g])) {
        xs.push_back(grid[g]);
        da.push_back(a[g]);
        db.push_back(b[g]);
      }
    }
    if (xs.size() < 2) throw EstimationError("pilot fits failed almost everywhere");
  };
  std::vector<double> xs, d1, d2;
  if (f.target == "group-diff") {
    check_groups(data, f.z1, f.z2);
    keep(derivative_curve(data.filter_group(f.z1)), derivative_curve(data.filter_group(f.z2)),
         xs, d1, d2);
    return group_curvature_integral(xs, d1, d2, weight);
  }
  const auto d = derivative_curve(data);
  keep(d, d, xs, d1, d2);
  return pairwise_curvature_integral(xs, d1, weight);
}

int cmd_bandwidth(const BandwidthFlags& f, std::ostream& out, std::ostream&) {
  const KernelSpec kernel = parse_kernel(f.kernel);
  if (f.target != "rel-risk" && f.target != "group-diff") {
    throw InputError("--target must be rel-risk or group-diff");
  }
  const double derived = derive_c0p(kernel, f.p);
  const double shipped = default_c0p(kernel, f.p);
  json doc = {{"command", "bandwidth"},
              {"kernel", kernel_name(kernel)},
              {"p", f.p},
              {"c0p", shipped},
              {"c0p_derived", derived}};
  out << "C0p(" << kernel_name(kernel) << ", p=" << f.p << ") = " << fmt(shipped, 3)
      << " (derived " << fmt(derived, 6) << ")\n";

  std::optional<double> curvature = f.curvature_integral;
  if (!curvature && !f.input.empty()) curvature = pilot_curvature(f, kernel);
  if (curvature) doc["curvature_integral"] = *curvature;
  if (f.variance_integral && curvature && f.n) {
    const auto plan = make_plan(kernel, f.p, {});
    const double h = f.target == "group-diff"
                         ? h_opt_group_diff(plan, *f.variance_integral, *curvature, *f.n)
                         : h_opt_relative_risk(plan, *f.variance_integral, *curvature, *f.n);
    doc["target"] = f.target;
    doc["variance_integral"] = *f.variance_integral;
    doc["n"] = *f.n;
    doc["h_opt"] = h;
    out << "h_opt (" << f.target << ", n=" << *f.n << ") = " << fmt(h, 6) << '\n';
  } else if (f.variance_integral || curvature || f.n) {
    throw InputError(
        "h_opt needs --variance-integral, --n and --curvature-integral (or --input)");
  }
  write_json(f.output_json, doc);
  return kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local partial likelihood estimation of relative risks in the Cox model",
               "hazrisk"};
  app.require_subcommand(1);
  // --h names a bandwidth, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", "hazrisk 0.1.0");

  FitCurveFlags fit;
  auto* fit_cmd = app.add_subcommand("fit-curve", "Local polynomial derivative curve and its integral");
  fit_cmd->add_option("--input", fit.input, "CSV with columns x,time,status")->required();
  fit_cmd->add_option("--grid", fit.grid, "lo:hi:count (default: data range, 101 points)");
  fit_cmd->add_option("--anchor", fit.anchor, "Reference point of the integrated curve");
  fit_cmd->add_option("--degree", fit.degree, "Local polynomial degree")->capture_default_str();
  fit_cmd->add_option("--h1", fit.h1, "Bandwidth")->capture_default_str();
  fit_cmd->add_option("--h-rule", fit.h_rule, "Variable bandwidth rule");
  fit_cmd->add_option("--kernel", fit.kernel, "Kernel")->capture_default_str();
  fit_cmd->add_option("--threads", fit.threads, "Worker threads");
  add_output_flags(fit_cmd, fit.output);

  RelRiskFlags rr;
  auto* rr_cmd = app.add_subcommand("rel-risk", "Relative risk psi(x2) - psi(x1)");
  rr_cmd->add_option("--input", rr.input, "CSV with columns x,time,status")->required();
  rr_cmd->add_option("--x1,--anchor", rr.x1, "Reference point")->required();
  rr_cmd->add_option("--x2", rr.x2, "Single comparison point (default: a curve over --grid)");
  rr_cmd->add_option("--x3", rr.x3, "Intermediate point for a chained estimate");
  rr_cmd->add_option("--grid", rr.grid, "lo:hi:count (default: data range, 101 points)");
  add_estimator_flags(rr_cmd, rr.est);
  add_output_flags(rr_cmd, rr.output);

  GroupDiffFlags gd;
  auto* gd_cmd = app.add_subcommand("group-diff", "Group difference psi(x, z2) - psi(x, z1)");
  gd_cmd->add_option("--input", gd.input, "CSV with columns x,time,status,group")->required();
  gd_cmd->add_option("--z1", gd.z1, "Reference group label")->capture_default_str();
  gd_cmd->add_option("--z2", gd.z2, "Compared group label")->capture_default_str();
  gd_cmd->add_option("--x", gd.x, "Single covariate point (default: a curve over --grid)");
  gd_cmd->add_option("--grid", gd.grid, "lo:hi:count (default: data range, 101 points)");
  add_estimator_flags(gd_cmd, gd.est);
  add_output_flags(gd_cmd, gd.output);

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo comparison on designs 1-3");
  sim_cmd->add_option("--design", sim.design, "1, 2 or 3")->check(CLI::Range(1, 3))->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "Sample size")->capture_default_str();
  sim_cmd->add_option("--reps", sim.reps, "Replications")->capture_default_str();
  sim_cmd->add_option("--censoring", sim.censoring, "Target censoring proportion")->capture_default_str();
  sim_cmd->add_option("--h0", sim.h0, "Base bandwidth")->capture_default_str();
  auto* seed_opt = sim_cmd->add_option("--seed", sim.seed, "Random seed (drawn and printed if absent)");
  sim_cmd->add_option("--p", sim.p, "Second-step degree")->capture_default_str();
  sim_cmd->add_option("--p1", sim.p1, "First-step degree")->capture_default_str();
  sim_cmd->add_option("--h-ratio", sim.h_ratio, "Second-step bandwidth share")->capture_default_str();
  sim_cmd->add_option("--kernel", sim.kernel, "Kernel")->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "Worker threads");
  sim_cmd->add_flag("--table1", sim.table1, "Run every design, h0 in {0.15,0.25,0.35}, censoring in {0,0.3}");
  sim_cmd->add_option("--coverage", sim.coverage_pair, "x1,x2: also report CI coverage of psi(x2)-psi(x1)");
  sim_cmd->add_option("--reps-csv", sim.reps_csv, "Dump per-replication ISE to this CSV");
  add_output_flags(sim_cmd, sim.output);

  BandwidthFlags bw;
  auto* bw_cmd = app.add_subcommand("bandwidth", "Optimal bandwidth constants and plug-in h_opt");
  bw_cmd->add_option("--p", bw.p, "Local polynomial degree")->capture_default_str();
  bw_cmd->add_option("--kernel", bw.kernel, "Kernel")->capture_default_str();
  bw_cmd->add_option("--target", bw.target, "rel-risk or group-diff")->capture_default_str();
  bw_cmd->add_option("--variance-integral", bw.variance_integral, "Variance plug-in integral");
  bw_cmd->add_option("--curvature-integral", bw.curvature_integral, "Curvature plug-in integral");
  bw_cmd->add_option("--n", bw.n, "Sample size");
  bw_cmd->add_option("--input", bw.input, "Estimate the curvature integral from this CSV");
  bw_cmd->add_option("--pilot-h", bw.pilot_h, "Pilot bandwidth")->capture_default_str();
  bw_cmd->add_option("--z1", bw.z1, "Reference group (group-diff)")->capture_default_str();
  bw_cmd->add_option("--z2", bw.z2, "Compared group (group-diff)")->capture_default_str();
  bw_cmd->add_option("--out", bw.output_json, "Write a JSON report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }
  sim.seed_given = seed_opt->count() > 0;

  try {
    if (*fit_cmd) return cmd_fit_curve(fit, out, err);
    if (*rr_cmd) return cmd_rel_risk(rr, out, err);
    if (*gd_cmd) return cmd_group_diff(gd, out, err);
    if (*sim_cmd) return cmd_simulate(sim, out, err);
    if (*bw_cmd) return cmd_bandwidth(bw, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const EstimationError& e) {
    err << "estimation error: " << e.what() << '\n';
    return kEstimationError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace hazrisk::cli
