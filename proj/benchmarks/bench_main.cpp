#include <benchmark/benchmark.h>

#include "ursqs/pomcp.hpp"
#include "ursqs/question_design.hpp"
#include "ursqs/ulam_tree.hpp"

using namespace ursqs;

static void BM_ComputeB(benchmark::State& state) {
  const std::size_t M = std::size_t{1} << state.range(0);
  const std::size_t e = state.range(1);
  for (auto _ : state) benchmark::DoNotOptimize(compute_B(M, 2, e).question_bound());
}
BENCHMARK(BM_ComputeB)->Args({10, 4})->Args({14, 8})->Unit(benchmark::kMillisecond);

static void BM_SolveAllocation(benchmark::State& state) {
  BasicAllocationProblem<__int128> p;
  for (int j = 0; j < state.range(0); ++j) p.loads.push_back(1000 * j + 17 * (j % 3));
  p.alpha = 250;
  p.budget = 64;
  p.cap = 64;
  for (auto _ : state) benchmark::DoNotOptimize(solve_allocation(p));
}
BENCHMARK(BM_SolveAllocation)->Arg(2)->Arg(8)->Arg(32);

static void BM_PerformanceMatrix(benchmark::State& state) {
  Rng rng(1);
  const std::size_t q = state.range(0);
  const CodeMatrix g = search_code_matrix(q, 10, 0.7, rng).matrix;
  for (auto _ : state) benchmark::DoNotOptimize(performance_matrix(g, 0.7));
}
BENCHMARK(BM_PerformanceMatrix)->Arg(2)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);

static void BM_PomcpMove(benchmark::State& state) {
  ChannelCache cache;
  const UrsqsPlan plan = optimize_qe(32, 9, 0.05, WorkerModel{}, cache);
  Rng rng(2);
  const PomdpModel model = build_model(plan, 300, ActionSampler::kUrt, rng);
  PomcpOptions opts;
  opts.simulations = static_cast<std::size_t>(state.range(0));
  opts.exploration = 0.25;
  opts.rollout = RolloutPolicy::kGreedy;
  opts.widening = 2.0;
  const Belief b = uniform_belief(32);
  for (auto _ : state) benchmark::DoNotOptimize(plan_action(model, b, 9, opts, rng));
}
BENCHMARK(BM_PomcpMove)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
