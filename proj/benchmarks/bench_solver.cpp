#include <benchmark/benchmark.h>

#include "csvx/envs.hpp"
#include "csvx/solver.hpp"

namespace {

void BM_ValueIteration(benchmark::State& state, const char* env_name) {
  const auto spec = csvx::build_env_by_name(env_name);
  const csvx::CompiledEnv env(spec);
  for (auto _ : state) benchmark::DoNotOptimize(csvx::value_iteration(env));
}
BENCHMARK_CAPTURE(BM_ValueIteration, gridworld1, "gridworld1");
BENCHMARK_CAPTURE(BM_ValueIteration, frozenlake, "frozenlake");
BENCHMARK_CAPTURE(BM_ValueIteration, taxi, "taxi");
BENCHMARK_CAPTURE(BM_ValueIteration, pendulum, "pendulum");

void BM_ExactMasked(benchmark::State& state) {
  const auto spec = csvx::build_taxi();
  const csvx::CompiledEnv env(spec);
  const csvx::Coalition c({0, 1});  // taxi position only
  for (auto _ : state) benchmark::DoNotOptimize(csvx::exact_masked(env, c));
}
BENCHMARK(BM_ExactMasked);

void BM_QLearningMasked(benchmark::State& state) {
  const auto spec = csvx::build_gridworld1();
  const csvx::CompiledEnv env(spec);
  csvx::TrainConfig cfg;
  cfg.episodes = state.range(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(csvx::q_learning_masked(env, csvx::Coalition({1}), cfg, 1));
}
BENCHMARK(BM_QLearningMasked)->Arg(1000)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
