#include <benchmark/benchmark.h>

#include <censusflow/metrics.hpp>
#include <censusflow/rng.hpp>
#include <censusflow/synthetic.hpp>
#include <censusflow/workers.hpp>

using namespace censusflow;

namespace {

std::string random_word(Rng& rng, std::size_t n) {
  std::string s(n, 'a');
  for (auto& c : s) c = static_cast<char>('a' + rng.below(26));
  return s;
}

void BM_CharDistance(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::string a = random_word(rng, n);
  const std::string b = random_word(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(char_distance(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CharDistance)->RangeMultiplier(4)->Range(8, 2048)->Complexity(benchmark::oNSquared);

void BM_ErrorRatesPage(benchmark::State& state) {
  const auto truth = generate_synthetic_page(3);
  NoiseProfile noise;
  noise.char_substitution = 0.1;
  const auto pred = apply_noise(truth, noise, 4);
  for (auto _ : state) benchmark::DoNotOptimize(error_rates(truth, pred));
}
BENCHMARK(BM_ErrorRatesPage);

void BM_EntityScoresPage(benchmark::State& state) {
  const auto truth = generate_synthetic_page(3);
  NoiseProfile noise{0.05, 0.05, 0.05, 0.0};
  const auto pred = apply_noise(truth, noise, 4);
  for (auto _ : state) benchmark::DoNotOptimize(entity_scores(truth, pred));
}
BENCHMARK(BM_EntityScoresPage);

}  // namespace
