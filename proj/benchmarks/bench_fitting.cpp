#include <benchmark/benchmark.h>

#include <random>

#include "cardie/fitquant.hpp"

namespace {

void BM_FitPair(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cardie::PixelSample> samples(static_cast<std::size_t>(state.range(0)));
  for (auto& s : samples) {
    s.in = u(rng);
    s.out = cardie::naka_rushton(s.in, 2.0, 0.4);
  }
  for (auto _ : state) benchmark::DoNotOptimize(cardie::fit_pair(samples));
}
BENCHMARK(BM_FitPair)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
