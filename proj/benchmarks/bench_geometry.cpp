#include <benchmark/benchmark.h>

#include "fingen/geometry/design_space.hpp"
#include "fingen/geometry/raster.hpp"

using namespace fingen::geometry;

static void BM_Validate(benchmark::State& state) {
  const auto space = staggered_layout();
  for (auto _ : state) benchmark::DoNotOptimize(validate_geometry(space));
}
BENCHMARK(BM_Validate);

static void BM_Rasterize(benchmark::State& state) {
  const auto space = staggered_layout();
  const int side = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_unchecked(space, side, side));
}
BENCHMARK(BM_Rasterize)->Arg(64)->Arg(128)->Arg(256);
