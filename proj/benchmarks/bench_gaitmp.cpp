#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "gaitmp/gaitmp.hpp"

using namespace gaitmp;

namespace {

std::vector<double> walk(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  double v = 0.0;
  for (auto& xi : x) xi = (v += d(rng));
  return x;
}

void BM_MatrixProfileSelf(benchmark::State& state) {
  const TimeSeries ts(walk(static_cast<std::size_t>(state.range(0)), 1), 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(matrix_profile_self(ts, 64));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatrixProfileSelf)->RangeMultiplier(2)->Range(512, 8192)->Complexity();

void BM_BruteForceMp(benchmark::State& state) {
  const TimeSeries ts(walk(static_cast<std::size_t>(state.range(0)), 1), 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_mp(ts, 64, default_exclusion(64)));
}
BENCHMARK(BM_BruteForceMp)->Arg(512)->Arg(1024);

void BM_DistanceProfile(benchmark::State& state) {
  const auto x = walk(static_cast<std::size_t>(state.range(0)), 2);
  const std::vector<double> q(x.begin() + 100, x.begin() + 200);
  for (auto _ : state) benchmark::DoNotOptimize(distance_profile(q, x));
}
BENCHMARK(BM_DistanceProfile)->RangeMultiplier(4)->Range(512, 32768);

void BM_StepGatedReplay(benchmark::State& state) {
  SynthConfig c;
  c.n_normal_steps = 50;
  c.n_anomalous_steps = 4;
  const auto g = generate(c);
  for (auto _ : state) {
    StepGatedDetector d(StepDetectorSystemConfig::for_rate(c.sample_rate_hz));
    benchmark::DoNotOptimize(replay(d, g.recording.samples));
  }
  state.counters["samples/s"] = benchmark::Counter(
      static_cast<double>(g.recording.size()), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_StepGatedReplay)->Unit(benchmark::kMillisecond);

void BM_NaiveReplay(benchmark::State& state) {
  SynthConfig c;
  c.n_normal_steps = 50;
  c.n_anomalous_steps = 4;
  const auto g = generate(c);
  const auto signal = g.recording.project({});
  auto cfg = NaiveDetectorConfig::for_rate(c.sample_rate_hz);
  cfg.hop = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    NaiveDetector d(cfg);
    benchmark::DoNotOptimize(replay(d, signal.values()));
  }
}
BENCHMARK(BM_NaiveReplay)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
