#include <benchmark/benchmark.h>

#include <cstdint>

#include "welfare/dyadic.hpp"
#include "welfare/environment.hpp"
#include "welfare/exp3.hpp"
#include "welfare/income.hpp"
#include "welfare/regret.hpp"
#include "welfare/rng.hpp"

using namespace welfare;

static void BM_TemperedExp3Step(benchmark::State& state) {
  const auto K = static_cast<std::size_t>(state.range(0));
  TemperedExp3 algo({K, 0.1, 0.025, 0.7});
  const auto env = Environment::uniform(1);
  const CounterStream draws(derive_key(1, {kPolicyStream}));
  std::uint64_t t = 0;
  for (auto _ : state) {
    ++t;
    benchmark::DoNotOptimize(algo.step(draws.uniform(t), env.draw(t)));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TemperedExp3Step)->Arg(10)->Arg(20)->Arg(100)->Arg(1000);

static void BM_MonopolyExp3Step(benchmark::State& state) {
  MonopolyExp3 algo(static_cast<std::size_t>(state.range(0)), 0.1, 0.025);
  const auto env = Environment::uniform(1);
  const CounterStream draws(derive_key(1, {kPolicyStream}));
  std::uint64_t t = 0;
  for (auto _ : state) {
    ++t;
    benchmark::DoNotOptimize(algo.step(draws.uniform(t), env.draw(t)));
  }
}
BENCHMARK(BM_MonopolyExp3Step)->Arg(20)->Arg(1000);

static void BM_DyadicStep(benchmark::State& state) {
  const auto T = static_cast<std::uint64_t>(state.range(0));
  const auto env = Environment::uniform(2);
  for (auto _ : state) {
    DyadicSearch search(DyadicConfig::for_horizon(0.7, static_cast<double>(T)));
    for (std::uint64_t t = 1; t <= T; ++t) benchmark::DoNotOptimize(search.step(env.draw(t)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_DyadicStep)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);

static void BM_IncomeStep(benchmark::State& state) {
  IncomeExp3 algo({20, 0.1, 0.004, {0.0, 0.3, 0.6}, {0.9, 0.6, 0.3}});
  const WageSource wages(UniformWage{}, 3);
  const auto env = Environment::uniform(3);
  const CounterStream draws(derive_key(3, {kPolicyStream}));
  std::uint64_t t = 0;
  for (auto _ : state) {
    ++t;
    benchmark::DoNotOptimize(income_step(algo, draws.uniform(t), wages.draw(t), env.draw(t)));
  }
}
BENCHMARK(BM_IncomeStep);

static void BM_BestConstantAdversarial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CounterStream s(derive_key(4, {1}));
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = s.uniform(i);
  for (auto _ : state) benchmark::DoNotOptimize(best_constant_adversarial(values, 0.7));
  state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_BestConstantAdversarial)->Range(1 << 10, 1 << 20)->Complexity();

BENCHMARK_MAIN();
