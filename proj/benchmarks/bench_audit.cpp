#include <benchmark/benchmark.h>

#include <random>

#include "awaire/alpha.hpp"
#include "awaire/contest.hpp"
#include "awaire/engine.hpp"
#include "awaire/simulate.hpp"

namespace {

void BM_AlphaStep(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<double> xs(4096);
  for (auto& x : xs) x = static_cast<double>(rng() % 3) / 2.0;
  awaire::AlphaState s(1 << 30, awaire::AlphaConfig{});
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.step(xs[k++ & 4095]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_AlphaStep);

// One draw of a full six-candidate audit (600 alt-orders) on the
// pathological contest.
void BM_AuditObserve(benchmark::State& state) {
  const auto contest = awaire::generate_pathological(25);
  const auto order = awaire::sampling_order(contest.num_ballots(), 7);
  awaire::AuditConfig config;
  config.scheme = static_cast<awaire::WeightScheme>(state.range(0));
  config.risk_limit = 1e-300;
  auto audit = awaire::Audit::for_contest(6, 1, contest.num_ballots(), config);
  std::size_t t = 0;
  for (auto _ : state) {
    if (t == contest.num_ballots()) {
      state.PauseTiming();
      audit = awaire::Audit::for_contest(6, 1, contest.num_ballots(), config);
      t = 0;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(audit.observe(contest.ballots()[order[t++]]));
  }
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(std::string(awaire::to_string(config.scheme)));
}
BENCHMARK(BM_AuditObserve)->DenseRange(0, 3);

void BM_SamplingOrder(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        awaire::sampling_order(static_cast<std::size_t>(state.range(0)), seed++));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplingOrder)->Arg(1000)->Arg(56000);

void BM_RunOnceWrongWinner(benchmark::State& state) {
  const auto contest = awaire::generate_pathological(250);
  awaire::AuditConfig config;
  config.risk_limit = 0.05;
  std::uint64_t k = 0;
  for (auto _ : state) {
    const auto seed = awaire::trial_seed(1, k++);
    const auto order = awaire::sampling_order(contest.num_ballots(), seed);
    benchmark::DoNotOptimize(awaire::run_once(contest, 1, order, config, std::nullopt, seed));
  }
}
BENCHMARK(BM_RunOnceWrongWinner)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
