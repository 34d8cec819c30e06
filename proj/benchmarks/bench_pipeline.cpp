#include <benchmark/benchmark.h>

#include "mvid/pipeline.hpp"

using namespace mvid;

namespace {

SyntheticFrame frame(int size, int points) {
  SyntheticDatasetConfig cfg;
  cfg.scene.width = size;
  cfg.scene.height = size;
  cfg.sparsifier.target_count = points;
  cfg.seed = 1;
  return make_synthetic_frame(cfg, 0);
}

void BM_GlobalAlignment(benchmark::State& state) {
  const auto f = frame(384, static_cast<int>(state.range(0)));
  const auto profile = ClampProfile::void_profile();
  for (auto _ : state) benchmark::DoNotOptimize(run_global_alignment(f.pred, f.sparse, profile));
}
BENCHMARK(BM_GlobalAlignment)->Arg(50)->Arg(150)->Arg(500)->Arg(1500)->Unit(benchmark::kMicrosecond);

void BM_Scaffold(benchmark::State& state) {
  const auto f = frame(384, static_cast<int>(state.range(0)));
  const auto ga = run_global_alignment(f.pred, f.sparse, ClampProfile::void_profile());
  for (auto _ : state) benchmark::DoNotOptimize(run_scaffolding(f.sparse, ga.z_tilde));
}
BENCHMARK(BM_Scaffold)->Arg(50)->Arg(150)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

void BM_SmlForward(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto f = frame(size, 150);
  const auto profile = ClampProfile::void_profile();
  SmlNetwork<float> net(SmlWeights::initialize(SmlConfig{}, 1, false));
  for (auto _ : state) benchmark::DoNotOptimize(align_frame(f.pred, f.sparse, profile, &net));
}
BENCHMARK(BM_SmlForward)->Arg(96)->Arg(384)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
