#include <benchmark/benchmark.h>

#include <censusflow/simulate.hpp>

using namespace censusflow;

namespace {

std::vector<StageModel> model(int gpu) {
  return {parse_stage_spec("pre:1.6:14"), parse_stage_spec("proc:12.5:" + std::to_string(gpu)),
          parse_stage_spec("post:7.2:14")};
}

void BM_SimulateImages(benchmark::State& state) {
  const auto stages = model(9);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate(n, stages));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_SimulateImages)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);

void BM_MinWorkersEightDays(benchmark::State& state) {
  auto stages = model(1);
  stages[1].workers = 0;
  for (auto _ : state) benchmark::DoNotOptimize(min_workers_for_deadline(450000, stages, 691200.0));
}
BENCHMARK(BM_MinWorkersEightDays)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
