#include <benchmark/benchmark.h>

#include <censusflow/label_codec.hpp>
#include <censusflow/rng.hpp>
#include <censusflow/synthetic.hpp>

using namespace censusflow;

namespace {

void BM_Encode(benchmark::State& state) {
  const auto page = generate_synthetic_page(7);
  for (auto _ : state) benchmark::DoNotOptimize(encode(page));
}
BENCHMARK(BM_Encode);

void BM_DecodeStrict(benchmark::State& state) {
  const auto label = encode(generate_synthetic_page(7)).text;
  for (auto _ : state) benchmark::DoNotOptimize(decode_strict(label));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * label.size()));
}
BENCHMARK(BM_DecodeStrict);

void BM_DecodeLenientGarbage(benchmark::State& state) {
  Rng rng(5);
  std::string input(static_cast<std::size_t>(state.range(0)), '\0');
  for (auto& c : input) c = static_cast<char>(rng.below(256));
  for (auto _ : state) benchmark::DoNotOptimize(decode_lenient(input));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * input.size()));
}
BENCHMARK(BM_DecodeLenientGarbage)->Range(64, 16384);

}  // namespace
