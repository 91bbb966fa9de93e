#include <benchmark/benchmark.h>

#include <random>

#include "cardie/clustering.hpp"

namespace {

// planted prototypes with 5% bit flips
cardie::DescriptorTable planted(std::size_t n, std::size_t width, int prototypes) {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution half(0.5), flip(0.05);
  std::vector<cardie::BoolRow> protos(prototypes, cardie::BoolRow(width));
  for (auto& p : protos)
    for (auto& bit : p) bit = half(rng);
  cardie::DescriptorTable t;
  for (std::size_t c = 0; c < width; ++c) t.columns.push_back("c" + std::to_string(c));
  for (std::size_t i = 0; i < n; ++i) {
    auto row = protos[i % prototypes];
    for (auto& bit : row) bit ^= flip(rng);
    t.ids.push_back("r" + std::to_string(i));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void BM_Hdbscan(benchmark::State& state) {
  const auto table = planted(static_cast<std::size_t>(state.range(0)), 8, 6);
  for (auto _ : state) benchmark::DoNotOptimize(cardie::hdbscan(table.rows, 10));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Hdbscan)->RangeMultiplier(2)->Range(250, 2000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_GridSearch(benchmark::State& state) {
  const auto table = planted(500, 8, 6);
  const auto grid = cardie::GridSpec::defaults(table.size(), 5, 4);
  for (auto _ : state) benchmark::DoNotOptimize(cardie::grid_search(table, grid, static_cast<unsigned>(state.range(0))));
}
BENCHMARK(BM_GridSearch)->Arg(1)->Arg(2)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
