#include <benchmark/benchmark.h>

#include "ricci/dirichlet.hpp"
#include "ricci/kernel_sim.hpp"

using namespace ricci;

namespace
{

void BM_HeatSpectralSetup(benchmark::State &state)
{
  const DirichletStructure ds = grid_structure(build_circle_grid(1.0, state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(HeatOperator(ds, HeatMode::spectral).spectral_gap());
}
BENCHMARK(BM_HeatSpectralSetup)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond);

void BM_HeatApply(benchmark::State &state)
{
  const HeatMode mode = state.range(1) == 0 ? HeatMode::spectral : HeatMode::implicit_euler;
  const HeatOperator ho(grid_structure(build_circle_grid(1.0, state.range(0))), mode, 1e-4);
  Vector f = Vector::LinSpaced(state.range(0), -1.0, 1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(ho.apply(f, 0.01).sum());
}
BENCHMARK(BM_HeatApply)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMicrosecond);

void BM_BrownianPaths(benchmark::State &state)
{
  const DirichletStructure ds = cycle_structure(16);
  std::uint64_t k = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_brownian(ds, 0, 1.0, 1, k++).states.size());
}
BENCHMARK(BM_BrownianPaths);

} // namespace
