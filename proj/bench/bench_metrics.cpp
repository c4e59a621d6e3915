#include <random>

#include <benchmark/benchmark.h>

#include "acscore/metrics.hpp"

using namespace acscore;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

struct Fixture {
  ForecastEnsemble ensemble;
  TimeSeries series;
  ScoreConfig config;
};

Fixture make_fixture(std::size_t n, std::size_t m, std::size_t k) {
  Fixture f{ForecastEnsemble(n, m, k, 0), TimeSeries{"b", gaussian(n + m, 1)}, {}};
  const auto cells = gaussian(n * m * k, 2);
  for (std::size_t o = 0, c = 0; o < n; ++o)
    for (std::size_t s = 0; s < m; ++s)
      for (std::size_t i = 0; i < k; ++i) f.ensemble.at(o, s, i) = cells[c++];
  f.config.accuracy_weights = build_weight_schedule(WeightKind::linear, static_cast<int>(m));
  return f;
}

void BM_EnergyScoreReference(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto samples = gaussian(k * 24, 3);
  const auto y = gaussian(24, 4);
  const auto w = build_weight_schedule(WeightKind::linear, 24);
  const auto block = SampleBlock<double>::row_major(samples, k, 24);
  for (auto _ : state) benchmark::DoNotOptimize(reference::energy_score_empirical(block, y, w.weights()));
}

void BM_EnergyScoreParallel(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto samples = gaussian(k * 24, 3);
  const auto y = gaussian(24, 4);
  const auto w = build_weight_schedule(WeightKind::linear, 24);
  const auto block = SampleBlock<double>::row_major(samples, k, 24);
  for (auto _ : state) benchmark::DoNotOptimize(energy_score_empirical(block, y, w));
}

void BM_AcScoreReference(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 24, static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::ac_score(f.ensemble, f.series, f.config).ac_score);
}

void BM_AcScoreParallel(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 24, static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(ac_score(f.ensemble, f.series, f.config).ac_score);
}

}  // namespace

BENCHMARK(BM_EnergyScoreReference)->Arg(100)->Arg(1000)->Arg(4000);
BENCHMARK(BM_EnergyScoreParallel)->Arg(100)->Arg(1000)->Arg(4000);
BENCHMARK(BM_AcScoreReference)->Args({100, 1})->Args({200, 50})->Args({100, 200});
BENCHMARK(BM_AcScoreParallel)->Args({100, 1})->Args({200, 50})->Args({100, 200});

BENCHMARK_MAIN();
