#include <benchmark/benchmark.h>

#include "voimpc/mpc.hpp"
#include "voimpc/scenario.hpp"
#include "voimpc/sim.hpp"

using namespace voimpc;

namespace {

NodeModel model() {
  return {VoiParams{}, EnergyProfile{}, HarvestModel{},
          BatteryModel(2.75, 0.015, 3.6, OcvCurve::li_ion_default())};
}

Beliefs beliefs(std::size_t n) {
  Beliefs b;
  for (std::size_t k = 0; k < n; ++k) {
    b.process_forecast.push_back(k % 4 == 0 ? 3.2 : 1.5);
    b.harvest_forecast.push_back(k % 2 ? 0.0 : 600.0);
  }
  return b;
}

void BM_Solve(benchmark::State& state) {
  const auto m = model();
  MpcConfig c;
  c.horizon = static_cast<int>(state.range(0));
  const auto b = beliefs(c.windows());
  for (auto _ : state) benchmark::DoNotOptimize(solve(0.4, b, c, m));
}
BENCHMARK(BM_Solve)->Arg(0)->Arg(2)->Arg(11)->Arg(23)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
  const auto m = model();
  MpcConfig c;
  c.horizon = static_cast<int>(state.range(0));
  const auto b = beliefs(c.windows());
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_plan(0.4, b, c, m, 1.0));
}
BENCHMARK(BM_BruteForce)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Hindcast(benchmark::State& state) {
  const auto m = model();
  const auto ds = generate_scenario();
  const double z0 = soc_from_soe(0.3, m.battery);
  for (auto _ : state) benchmark::DoNotOptimize(run_hindcast(ds, m, MpcConfig{}, z0));
}
BENCHMARK(BM_Hindcast)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
