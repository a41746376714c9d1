#include <benchmark/benchmark.h>

#include <vector>

#include "msurv/median_ci.hpp"
#include "msurv/meta.hpp"
#include "msurv/simulation.hpp"

namespace {

using namespace msurv;

std::vector<EventRecord> study(int n) {
  RngStream stream(12345);
  return generate_study(Exponential{0.025}, Uniform{0.0, 100.0}, 100.0, n, stream);
}

void BM_KmFit(benchmark::State& state) {
  const auto records = study(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(km_fit(records));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KmFit)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_BcInterval(benchmark::State& state) {
  const auto curve = km_fit(study(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(bc_interval(curve, 0.5, 0.05, TransformKind::LogMinusLog));
}
BENCHMARK(BM_BcInterval)->RangeMultiplier(4)->Range(64, 16384);

void BM_Bootstrap(benchmark::State& state) {
  const auto records = study(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_percentile_ci(records, 0.5, 0.05, 1000, 7));
}
BENCHMARK(BM_Bootstrap)->Arg(50)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Reml(benchmark::State& state) {
  RngStream r(99);
  std::vector<StudyOutcome> ys;
  for (int i = 0; i < state.range(0); ++i) {
    const double se = 0.5 + r.uniform_open();
    ys.push_back({2.0 * r.normal() + se * r.normal(), se, Scale::Natural, {}, false});
  }
  for (auto _ : state) benchmark::DoNotOptimize(reml_tau2(ys));
}
BENCHMARK(BM_Reml)->Arg(5)->Arg(20)->Arg(100);

void BM_MetaAnalyze(benchmark::State& state) {
  RngStream r(100);
  std::vector<StudyOutcome> ys;
  for (int i = 0; i < 20; ++i) {
    const double se = 0.5 + r.uniform_open();
    ys.push_back({2.0 * r.normal() + se * r.normal(), se, Scale::Natural, {}, false});
  }
  for (auto _ : state) benchmark::DoNotOptimize(meta_analyze(ys, MetaModel::RandomEffects, 0.05));
}
BENCHMARK(BM_MetaAnalyze);

}  // namespace

BENCHMARK_MAIN();
