#include "qproc/constant_average.hpp"
#include "qproc/haar.hpp"
#include "qproc/nonmarkov.hpp"
#include "qproc/process.hpp"
#include "qproc/weingarten.hpp"

#include <benchmark/benchmark.h>

using namespace qproc;

static void BM_HaarUnitary(benchmark::State& state) {
  RngStream rng(1, 0);
  const auto d = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(haar_unitary(d, rng));
}
BENCHMARK(BM_HaarUnitary)->RangeMultiplier(2)->Range(4, 128);

static void BM_SampleProcess(benchmark::State& state) {
  RngStream rng(2, 0);
  ProcessConfig cfg;
  cfg.dS = 2;
  cfg.dE = static_cast<std::size_t>(state.range(0));
  cfg.k = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(sample_process(cfg, rng));
}
BENCHMARK(BM_SampleProcess)->ArgsProduct({{4, 32, 128}, {1, 2, 3}});

static void BM_N1MaxMixed(benchmark::State& state) {
  RngStream rng(3, 0);
  ProcessConfig cfg;
  cfg.dS = 2;
  cfg.dE = 16;
  cfg.k = static_cast<std::size_t>(state.range(0));
  const auto p = sample_process(cfg, rng);
  for (auto _ : state) benchmark::DoNotOptimize(n1_maxmixed(p));
}
BENCHMARK(BM_N1MaxMixed)->DenseRange(1, 3);

static void BM_WeingartenTable(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(weingarten_table(n, 8));
}
BENCHMARK(BM_WeingartenTable)->DenseRange(2, 6);

static void BM_AvgPurityConstant(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto dE = static_cast<std::size_t>(state.range(1));
  const auto rho = DensityMatrix::from_pure(PureState::basis(SubsystemLayout({"E", "S"}, {dE, 2}), 0));
  for (auto _ : state) benchmark::DoNotOptimize(avg_purity_constant(k, 2, dE, rho));
}
BENCHMARK(BM_AvgPurityConstant)->Args({1, 4})->Args({1, 16})->Args({2, 4});

BENCHMARK_MAIN();
