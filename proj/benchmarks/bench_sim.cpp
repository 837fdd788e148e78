#include <benchmark/benchmark.h>

#include "fingen/geometry/design_space.hpp"
#include "fingen/sim/flow.hpp"

using namespace fingen;

static void BM_FlowStep(benchmark::State& state) {
  const int resolution = static_cast<int>(state.range(0));
  const sim::FlowConditions conditions;
  sim::FlowSolver solver(sim::build_grid(geometry::single_fin_layout(), resolution, conditions), conditions);
  const double dt = sim::cfl_timestep(solver.fields(), conditions);
  for (auto _ : state) benchmark::DoNotOptimize(solver.step(dt));
}
BENCHMARK(BM_FlowStep)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

static void BM_Simulation(benchmark::State& state) {
  const int resolution = static_cast<int>(state.range(0));
  sim::FlowConditions conditions;
  conditions.reynolds = 10.0;
  conditions.prandtl = 0.7;
  const auto space = geometry::staggered_layout();
  for (auto _ : state) benchmark::DoNotOptimize(sim::run_simulation(space, conditions, resolution));
}
BENCHMARK(BM_Simulation)->Arg(32)->Unit(benchmark::kMillisecond)->Iterations(3);
