#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "fixtures.hpp"
#include "hazrisk/csv_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hazrisk");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = hazrisk::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "hazrisk_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_csv(const std::string& name, const std::vector<hazrisk::SurvivalSample>& s) {
  const auto path = (work_dir() / name).string();
  std::ofstream out(path);
  hazrisk::write_survival_csv(out, s);
  return path;
}

std::string write_text(const std::string& name, const std::string& text) {
  const auto path = (work_dir() / name).string();
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fixture::Options groups(int n, double effect, double censor_scale) {
  fixture::Options o;
  o.n = n;
  o.censor_scale = censor_scale;
  o.groups = true;
  o.group_effect = effect;
  return o;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"no-such-command"}).code == 2);
  CHECK(invoke({"simulate", "--design", "4"}).code == 2);
  CHECK(invoke({"rel-risk", "--x1", "0"}).code == 2);
}

TEST_CASE("rel-risk writes a point estimate and a curve") {
  const auto csv = write_csv("rr.csv", fixture::samples(1, {.n = 400}));
  const auto json_path = (work_dir() / "rr.json").string();
  const auto r = invoke({"rel-risk", "--input", csv, "--x1", "0", "--x2", "0.5", "--out", json_path});
  REQUIRE(r.code == 0);
  const auto doc = json::parse(slurp(json_path));
  CHECK(doc["command"] == "rel-risk");
  REQUIRE(doc["estimates"].size() == 1);
  const auto& e = doc["estimates"][0];
  CHECK(e["lo"].get<double>() < e["hi"].get<double>());

  const auto curve_csv = (work_dir() / "rr_curve.csv").string();
  const auto c = invoke({"rel-risk", "--input", csv, "--anchor", "0", "--grid", "-0.8:0.8:9",
                         "--csv", curve_csv, "--threads", "2"});
  REQUIRE(c.code == 0);
  std::istringstream lines(slurp(curve_csv));
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 10);
}

TEST_CASE("input and estimation errors map to exit codes") {
  const auto csv = write_csv("err.csv", fixture::samples(2, {.n = 200}));
  CHECK(invoke({"rel-risk", "--input", csv, "--x1", "0", "--x2", "5"}).code == 3);
  CHECK(invoke({"rel-risk", "--input", (work_dir() / "missing.csv").string(), "--x1", "0"}).code == 2);
  const auto bad = write_text("bad.csv", "x,time\n0.1,2.0\n");
  const auto r = invoke({"rel-risk", "--input", bad, "--x1", "0", "--x2", "0.5"});
  CHECK(r.code == 2);
  CHECK(r.err.find("status") != std::string::npos);
  const auto negative = write_text("neg.csv", "x,time,status\n0.1,-2.0,1\n");
  CHECK(invoke({"fit-curve", "--input", negative}).code == 2);
  CHECK(invoke({"rel-risk", "--input", csv, "--x1", "0", "--x2", "0.5", "--h", "0.5", "--h1", "0.3"}).code == 2);
  CHECK(invoke({"bandwidth", "--p", "2"}).code == 2);
}

TEST_CASE("group-diff requires a group column and warns on heavy censoring") {
  const auto plain = write_csv("nogroup.csv", fixture::samples(3, {.n = 200}));
  CHECK(invoke({"group-diff", "--input", plain, "--x", "0"}).code == 2);

  const auto data = write_csv("groups.csv", fixture::samples(4, groups(1500, 0.7, 3.0)));
  const auto ok = invoke({"group-diff", "--input", data, "--x", "0"});
  CHECK(ok.code == 0);
  CHECK(ok.err.find("censored") == std::string::npos);
  CHECK(invoke({"group-diff", "--input", data, "--x", "0", "--z2", "7"}).code == 2);

  const auto heavy = write_csv("heavy.csv", fixture::samples(5, groups(3000, 0.7, 0.1)));
  const auto warned = invoke({"group-diff", "--input", heavy, "--x", "0", "--h", "0.5", "--h1", "0.6"});
  CHECK(warned.err.find("censored") != std::string::npos);
}

TEST_CASE("fit-curve and bandwidth") {
  const auto csv = write_csv("fit.csv", fixture::samples(6, {.n = 300}));
  const auto json_path = (work_dir() / "fit.json").string();
  REQUIRE(invoke({"fit-curve", "--input", csv, "--grid", "-0.8:0.8:17", "--out", json_path}).code == 0);
  const auto doc = json::parse(slurp(json_path));
  CHECK(doc["points"].size() == 17);

  const auto bw = invoke({"bandwidth"});
  CHECK(bw.code == 0);
  CHECK(bw.out.find("1.719") != std::string::npos);
  const auto bw_json = (work_dir() / "bw.json").string();
  REQUIRE(invoke({"bandwidth", "--variance-integral", "2", "--curvature-integral", "3", "--n", "1000",
                  "--out", bw_json}).code == 0);
  const auto b = json::parse(slurp(bw_json));
  CHECK(b["h_opt"].get<double>() == doctest::Approx(1.719 * std::pow(2.0 / 3.0 / 1000.0, 0.2)));
  CHECK(invoke({"bandwidth", "--n", "1000"}).code == 2);
}

TEST_CASE("simulate output is reproducible") {
  const auto a = (work_dir() / "sim_a.json").string();
  const auto b = (work_dir() / "sim_b.json").string();
  const std::vector<std::string> base = {"simulate", "--design", "2", "--n", "200", "--reps", "10",
                                         "--censoring", "0.3", "--seed", "7"};
  auto args = base;
  args.insert(args.end(), {"--out", a, "--threads", "1"});
  REQUIRE(invoke(args).code == 0);
  args = base;
  args.insert(args.end(), {"--out", b, "--threads", "3"});
  REQUIRE(invoke(args).code == 0);
  CHECK(slurp(a) == slurp(b));
  const auto doc = json::parse(slurp(a));
  CHECK(doc["reps"] == 10);
  CHECK(doc["mse_by_point"].size() == 11);

  const auto unseeded = invoke({"simulate", "--n", "100", "--reps", "5"});
  CHECK(unseeded.code == 0);
  CHECK(unseeded.err.find("seed: ") != std::string::npos);
}

TEST_CASE("simulate table mode") {
  const auto path = (work_dir() / "table1.json").string();
  const auto r = invoke({"simulate", "--table1", "--n", "150", "--reps", "4", "--seed", "3", "--out", path});
  REQUIRE(r.code == 0);
  const auto doc = json::parse(slurp(path));
  CHECK(doc["table1"].size() == 18);
}
