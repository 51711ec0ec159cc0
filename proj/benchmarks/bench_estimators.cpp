#include <benchmark/benchmark.h>

#include "hazrisk/grid.hpp"
#include "hazrisk/local_fit.hpp"
#include "hazrisk/relative_risk.hpp"
#include "hazrisk/simulation.hpp"

namespace {

hazrisk::SurvivalDataset sample(int n) {
  auto rng = hazrisk::replication_stream(1, 0);
  return hazrisk::generate_replication(hazrisk::make_design(1), n, 3.3, rng);
}

void BM_FitLocal(benchmark::State& state) {
  const auto data = sample(static_cast<int>(state.range(0)));
  const int degree = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hazrisk::fit_local(data, 0.2, degree, 0.3, hazrisk::KernelSpec{}));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitLocal)->ArgsProduct({{300, 1000, 3000}, {1, 2, 3}})->Complexity();

void BM_EstimateAlpha(benchmark::State& state) {
  const auto data = sample(static_cast<int>(state.range(0)));
  const hazrisk::KernelSpec k{};
  const auto f1 = hazrisk::fit_local(data, 0.0, 2, 0.25, k);
  const auto f2 = hazrisk::fit_local(data, 0.5, 2, 0.25, k);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hazrisk::estimate_alpha(data, 0.0, 0.5, f1, f2, 0.2, k));
  }
}
BENCHMARK(BM_EstimateAlpha)->Arg(300)->Arg(1000)->Arg(3000);

void BM_EstimateRelativeRisk(benchmark::State& state) {
  const auto data = sample(static_cast<int>(state.range(0)));
  hazrisk::EstimatorConfig cfg;
  cfg.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hazrisk::estimate_relative_risk(data, 0.0, 0.5, cfg));
  }
}
BENCHMARK(BM_EstimateRelativeRisk)->Arg(300)->Arg(1000);

void BM_ReplicationCurves(benchmark::State& state) {
  hazrisk::SimulationConfig cfg;
  cfg.design = hazrisk::make_design(static_cast<int>(state.range(0)));
  const auto data = sample(300);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hazrisk::estimate_replication_curves(data, cfg));
  }
}
BENCHMARK(BM_ReplicationCurves)->DenseRange(1, 3);

void BM_GenerateReplication(benchmark::State& state) {
  const auto design = hazrisk::make_design(3);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    auto rng = hazrisk::replication_stream(1, rep++);
    benchmark::DoNotOptimize(hazrisk::generate_replication(design, 300, 3.3, rng));
  }
}
BENCHMARK(BM_GenerateReplication);

}  // namespace

BENCHMARK_MAIN();
