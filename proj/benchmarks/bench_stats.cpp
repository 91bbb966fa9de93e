#include <benchmark/benchmark.h>

#include <random>

#include "cardie/stats.hpp"

namespace {

void BM_KsTwoSample(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> a(0.0, 1.0), b(0.1, 1.0);
  std::vector<double> xs(static_cast<std::size_t>(state.range(0))), ys(xs.size());
  for (auto& x : xs) x = a(rng);
  for (auto& y : ys) y = b(rng);
  for (auto _ : state) benchmark::DoNotOptimize(cardie::ks_two_sample(xs, ys));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KsTwoSample)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oNLogN);

}  // namespace

BENCHMARK_MAIN();
