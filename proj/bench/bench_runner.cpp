#include <benchmark/benchmark.h>

#include "deplearn/harness.hpp"

using namespace deplearn;

namespace {

ExperimentConfig config(std::int64_t seeds, bool parallel) {
  ExperimentConfig c;
  c.horizon = 1000;
  c.parallel = parallel;
  c.seeds.clear();
  for (std::int64_t i = 0; i < seeds; ++i) c.seeds.push_back(static_cast<std::uint64_t>(i));
  return c;
}

void BM_LearnSerial(benchmark::State& state) {
  const auto c = config(state.range(0), false);
  for (auto _ : state) benchmark::DoNotOptimize(run_learning(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LearnOpenMP(benchmark::State& state) {
  const auto c = config(state.range(0), true);
  for (auto _ : state) benchmark::DoNotOptimize(run_learning(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Aggregate(benchmark::State& state) {
  const auto spec = load_world_spec(DEPLEARN_DATA_DIR "/techtree.json");
  const auto truth = spec.truth_graph();
  const auto goals = spec.goal_items();
  for (auto _ : state) {
    for (const auto& g : goals) benchmark::DoNotOptimize(aggregate_requirements(truth, g, {}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(goals.size()));
}

}  // namespace

BENCHMARK(BM_LearnSerial)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LearnOpenMP)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Aggregate);

BENCHMARK_MAIN();
