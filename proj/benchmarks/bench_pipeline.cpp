#include <benchmark/benchmark.h>

#include <cmath>
#include <filesystem>

#include "specinfer/cli/config.hpp"
#include "specinfer/compiler.hpp"
#include "specinfer/demos.hpp"
#include "specinfer/planner.hpp"

using namespace specinfer;

namespace {

const cli::Problem& experiment() {
  static const cli::Problem p =
      cli::prepare(cli::load_config(std::filesystem::path(SPECINFER_CONFIG_DIR) / "experiment/config.json"));
  return p;
}

void BM_Unroll(benchmark::State& state) {
  const cli::Problem& p = experiment();
  const Candidate& c = p.candidates[static_cast<std::size_t>(state.range(0))];
  const auto tau = static_cast<unsigned>(state.range(1));
  std::size_t nodes = 0;
  for (auto _ : state) {
    const TraceBdd b = unroll(p.pa, c.monitor, tau);
    nodes = b.size().internal;
    benchmark::DoNotOptimize(b.root());
  }
  state.counters["nodes"] = static_cast<double>(nodes);
  state.SetLabel(c.name);
}
BENCHMARK(BM_Unroll)
    ->ArgsProduct({{0, 1, 2}, {5, 10, 20}})
    ->Unit(benchmark::kMillisecond);

void BM_ValueBackup(benchmark::State& state) {
  const cli::Problem& p = experiment();
  const TraceBdd b = unroll(p.pa, p.candidates[0].monitor, static_cast<unsigned>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(value_backup(b, 3.0).root_value());
  state.counters["nodes"] = static_cast<double>(b.size().internal);
}
BENCHMARK(BM_ValueBackup)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMicrosecond);

void BM_SatProb(benchmark::State& state) {
  const cli::Problem& p = experiment();
  const TraceBdd b = unroll(p.pa, p.candidates[0].monitor, 10);
  const ValueTable vt = value_backup(b, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(sat_prob(b, vt));
}
BENCHMARK(BM_SatProb)->Unit(benchmark::kMicrosecond);

void BM_FitTheta(benchmark::State& state) {
  const cli::Problem& p = experiment();
  const TraceBdd b = unroll(p.pa, p.candidates[0].monitor, 10);
  FitOptions opts;
  opts.tolerance = std::pow(10.0, -static_cast<double>(state.range(0)));
  unsigned iterations = 0;
  for (auto _ : state) iterations = fit_theta(b, 5.0 / 6.0, opts).iterations;
  state.counters["evaluations"] = iterations;
}
BENCHMARK(BM_FitTheta)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Rank(benchmark::State& state) {
  const cli::Problem& p = experiment();
  RankOptions opts;
  opts.jobs = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rank(p.pa, p.candidates, p.demos, p.horizon, opts).rows.size());
}
BENCHMARK(BM_Rank)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

} // namespace
BENCHMARK_MAIN();
