// Serial references against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "gapmech/instance.hpp"
#include "gapmech/mechanism.hpp"
#include "gapmech/objective.hpp"
#include "gapmech/rounding.hpp"
#include "gapmech/verify.hpp"

using namespace gapmech;

namespace {

struct ObjectiveCase {
  Instance inst;
  ItemPermutation perm;
  MarginalMatrix y;

  explicit ObjectiveCase(std::size_t side)
      : inst(generate_instance(side, side * 4, 7, Profile::kUniform)),
        perm(value_sorted_permutation(inst)),
        y(random_marginals(side, side * 4, 3)) {}
};

void BM_EvalF_Serial(benchmark::State& state) {
  const ObjectiveCase c(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eval_F_serial(c.inst.values, c.perm, c.y));
}

void BM_EvalF_Parallel(benchmark::State& state) {
  const ObjectiveCase c(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eval_F_parallel(c.inst.values, c.perm, c.y));
}

void BM_GradF_Serial(benchmark::State& state) {
  const ObjectiveCase c(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(grad_F_serial(c.inst.values, c.perm, c.y));
}

void BM_GradF_Parallel(benchmark::State& state) {
  const ObjectiveCase c(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(grad_F_parallel(c.inst.values, c.perm, c.y));
}

struct RoundingCase {
  Instance inst = generate_instance(4, 8, 11, Profile::kUniform);
  ItemPermutation perm = value_sorted_permutation(inst);
  GreedyRounder rounder{damp_assignment(random_fractional_assignment(inst, 5)), perm};
};

void BM_MonteCarlo_Serial(benchmark::State& state) {
  const RoundingCase c;
  for (auto _ : state) {
    benchmark::DoNotOptimize(monte_carlo_welfare_serial(c.rounder, c.inst.values, state.range(0), 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MonteCarlo_Parallel(benchmark::State& state) {
  const RoundingCase c;
  for (auto _ : state) {
    benchmark::DoNotOptimize(monte_carlo_welfare(c.rounder, c.inst.values, state.range(0), 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BruteForce_Serial(benchmark::State& state) {
  const Instance inst = generate_instance(3, static_cast<std::size_t>(state.range(0)), 2, Profile::kUniform);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_opt(inst).value);
}

void BM_BruteForce_Parallel(benchmark::State& state) {
  const Instance inst = generate_instance(3, static_cast<std::size_t>(state.range(0)), 2, Profile::kUniform);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_opt_parallel(inst).value);
}

}  // namespace

BENCHMARK(BM_EvalF_Serial)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK(BM_EvalF_Parallel)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK(BM_GradF_Serial)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK(BM_GradF_Parallel)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK(BM_MonteCarlo_Serial)->Arg(10'000)->Arg(100'000);
BENCHMARK(BM_MonteCarlo_Parallel)->Arg(10'000)->Arg(100'000);
BENCHMARK(BM_BruteForce_Serial)->Arg(6)->Arg(8);
BENCHMARK(BM_BruteForce_Parallel)->Arg(6)->Arg(8);

BENCHMARK_MAIN();
