#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "fixtures.hpp"
#include "hazrisk/csv_io.hpp"
#include "hazrisk/errors.hpp"
#include "hazrisk/grid.hpp"
#include "hazrisk/parallel.hpp"

using namespace hazrisk;

TEST_CASE("linspace hits the design anchors exactly") {
  const auto g = linspace(-1.0, 1.0, 101);
  REQUIRE(g.size() == 101);
  CHECK(g.front() == -1.0);
  CHECK(g.back() == 1.0);
  CHECK(g[50] == 0.0);
  CHECK(g[20] == -0.6);
  CHECK(g[80] == 0.6);
}

TEST_CASE("linear interpolation clamps at the ends") {
  const std::vector<double> k = {0.0, 1.0, 3.0};
  const std::vector<double> v = {1.0, 3.0, -1.0};
  CHECK(interpolate_linear(k, v, 0.5) == doctest::Approx(2.0));
  CHECK(interpolate_linear(k, v, 2.0) == doctest::Approx(1.0));
  CHECK(interpolate_linear(k, v, -4.0) == 1.0);
  CHECK(interpolate_linear(k, v, 9.0) == -1.0);
}

TEST_CASE("parallel_for visits each index once and rethrows") {
  for (unsigned threads : {1u, 3u, 8u}) {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(50, threads,
                                 [](std::size_t i) {
                                   if (i == 17) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
  }
}

TEST_CASE("thread count honours the environment") {
  setenv("HAZRISK_THREADS", "3", 1);
  CHECK(default_thread_count() == 3);
  unsetenv("HAZRISK_THREADS");
  CHECK(default_thread_count() >= 1);
}

TEST_CASE("CSV round trip and validation") {
  auto raw = fixture::samples(2, {.n = 25, .groups = true});
  std::stringstream buf;
  write_survival_csv(buf, raw);
  const auto back = read_survival_csv(buf);
  REQUIRE(back.size() == raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    CHECK(back[i].x == raw[i].x);
    CHECK(back[i].time == raw[i].time);
    CHECK(back[i].status == raw[i].status);
    CHECK(back[i].group == raw[i].group);
  }

  std::istringstream reordered("status,extra,time,x\n1,foo,2.5,0.1\n0,bar,1.0,-0.3\n");
  const auto r = read_survival_csv(reordered);
  CHECK(r.size() == 2);
  CHECK(r[1].x == doctest::Approx(-0.3));
  CHECK_FALSE(r[0].group.has_value());

  std::istringstream missing("x,time\n0.1,2\n");
  CHECK_THROWS_WITH_AS(read_survival_csv(missing), doctest::Contains("status"), InputError);
  std::istringstream bad_status("x,time,status\n0.1,2,1\n0.2,3,7\n");
  CHECK_THROWS_WITH_AS(read_survival_csv(bad_status), doctest::Contains("line 3"), InputError);
  std::istringstream bad_time("x,time,status\n0.1,-2,1\n");
  CHECK_THROWS_AS(read_survival_csv(bad_time), InputError);
  std::istringstream ragged("x,time,status\n0.1,2\n");
  CHECK_THROWS_AS(read_survival_csv(ragged), InputError);
  CHECK_THROWS_AS(read_survival_csv_file("/nonexistent/file.csv"), InputError);
}
