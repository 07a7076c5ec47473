#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <vector>

#include "csvx/shapley.hpp"

namespace {

csvx::CharacteristicFn random_game(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  auto values = std::make_shared<std::vector<double>>(1ull << n);
  for (auto& v : *values) v = dist(rng);
  (*values)[0] = 0.0;
  return csvx::synthetic_cvf(
      n, [values](const csvx::Coalition& c) { return (*values)[c.mask()]; });
}

void BM_ShapleyExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto fn = random_game(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(csvx::shapley_exact(fn));
  state.SetComplexityN(1ll << n);
}
BENCHMARK(BM_ShapleyExact)->DenseRange(4, 16, 2)->Complexity();

void BM_ShapleyMonteCarlo(benchmark::State& state) {
  const auto fn = random_game(16, 1);
  const long long samples = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(csvx::shapley_mc(fn, samples, 7));
}
BENCHMARK(BM_ShapleyMonteCarlo)->Arg(100)->Arg(1000)->Arg(10000);

}  // namespace
