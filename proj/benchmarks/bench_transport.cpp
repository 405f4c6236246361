#include <benchmark/benchmark.h>

#include <cmath>

#include "ricci/circle_transport.hpp"
#include "ricci/mmdist.hpp"
#include "ricci/transport.hpp"

using namespace ricci;

namespace
{

Vector bump(const GridSpace &g, double center)
{
  Vector mu(g.size());
  for (Index i = 0; i < g.size(); ++i)
    mu[i] = std::exp(std::cos(2.0 * M_PI * (g.coordinate(i).x / g.length() - center)));
  return mu / mu.sum();
}

void BM_ExactW2Circle(benchmark::State &state)
{
  const GridSpace g = build_circle_grid(1.0, state.range(0));
  const Vector mu = bump(g, 0.0), nu = bump(g, 0.4);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_w2_exact(g.space(), mu, nu).w2);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExactW2Circle)->RangeMultiplier(2)->Range(16, 128)->Complexity();

void BM_CellTransportCircle(benchmark::State &state)
{
  const GridSpace g = build_circle_grid(1.0, state.range(0));
  const Vector mu = bump(g, 0.0), nu = bump(g, 0.4);
  for (auto _ : state)
    benchmark::DoNotOptimize(cell_transport(g, mu, nu, true).w2_squared);
}
BENCHMARK(BM_CellTransportCircle)->RangeMultiplier(4)->Range(16, 1024);

void BM_EntropicW2Circle(benchmark::State &state)
{
  const GridSpace g = build_circle_grid(1.0, state.range(0));
  const Vector mu = bump(g, 0.0), nu = bump(g, 0.4);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_entropic(g.space(), mu, nu, 1e-3).plan.cost);
}
BENCHMARK(BM_EntropicW2Circle)->RangeMultiplier(2)->Range(16, 128);

void BM_DUpperBoundRefinement(benchmark::State &state)
{
  const Index n = state.range(0);
  const MetricMeasureSpace x = build_circle_grid(1.0, n).space(), y = build_circle_grid(1.0, 2 * n).space();
  const Matrix init = even_index_embedding(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(d_upper_bound(x, y, init).upper);
}
BENCHMARK(BM_DUpperBoundRefinement)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

} // namespace
