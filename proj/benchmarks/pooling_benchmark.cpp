#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dynimg/rankpool.hpp"
#include "dynimg/ranksvm.hpp"
#include "dynimg/volume.hpp"

namespace {

dynimg::Volume3D cube(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<float> dist(-100.0f, 100.0f);
  std::vector<float> v(n * n * n);
  for (auto& x : v) x = dist(rng);
  return dynimg::Volume3D(n, n, n, std::move(v));
}

template <typename Fn>
void run(benchmark::State& state, Fn fn) {
  const auto v = cube(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fn(v));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.voxel_count()));
}

void BM_SinglePass(benchmark::State& state) {
  run(state, [](const auto& v) { return dynimg::approx_rank_pool(v, dynimg::PoolStrategy::SinglePass); });
}
void BM_TwoPass(benchmark::State& state) {
  run(state, [](const auto& v) { return dynimg::approx_rank_pool(v, dynimg::PoolStrategy::TwoPass); });
}
void BM_AvgPool(benchmark::State& state) {
  run(state, [](const auto& v) { return dynimg::avg_pool_depth(v); });
}
void BM_MaxPool(benchmark::State& state) {
  run(state, [](const auto& v) { return dynimg::max_pool_depth(v); });
}

void BM_ExactSolve(benchmark::State& state) {
  const auto p = dynimg::build_problem(cube(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(dynimg::solve(p, {10, 1.0}));
}

}  // namespace

BENCHMARK(BM_SinglePass)->Arg(32)->Arg(64)->Arg(110)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TwoPass)->Arg(32)->Arg(64)->Arg(110)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AvgPool)->Arg(32)->Arg(64)->Arg(110)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaxPool)->Arg(32)->Arg(64)->Arg(110)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExactSolve)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
