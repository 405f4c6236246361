#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ricci/mmdist.hpp"

using namespace ricci;

namespace
{

// Smallest sqrt(sum gamma b^2) over bridges between two-point spaces with the identity coupling,
// found on a grid.  A bridge is admissible when the four-point table is a pseudo-metric.
double two_point_grid_search(double dx, double dy)
{
  auto admissible = [&](double b00, double b01, double b10, double b11) {
    // Points 0, 1 in X and 2, 3 in Y.
    const double d[4][4] = {{0, dx, b00, b01}, {dx, 0, b10, b11}, {b00, b10, 0, dy}, {b01, b11, dy, 0}};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          if (d[i][j] > d[i][k] + d[k][j] + 1e-12)
            return false;
    return true;
  };
  double best = kInf;
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j)
    {
      const double b00 = 0.005 * i, b11 = 0.005 * j;
      const double value = std::sqrt(0.5 * b00 * b00 + 0.5 * b11 * b11);
      if (value >= best)
        continue;
      bool ok = false;
      for (int p = 0; p <= 80 && !ok; ++p)
        for (int q = 0; q <= 80 && !ok; ++q)
          ok = admissible(b00, 0.9 + 0.005 * p, 0.9 + 0.005 * q, b11);
      if (ok)
        best = value;
    }
  return best;
}

} // namespace

TEST_CASE("repair produces an admissible bridge")
{
  const GridSpace x = build_circle_grid(1.0, 6), y = build_circle_grid(1.3, 5);
  oracle::Rng rng(1);
  Matrix b(6, 5);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 5; ++j)
      b(i, j) = rng.uniform() - 0.2;
  CHECK(bridge_violation(x.space(), y.space(), b) > 0.0);
  const Matrix r = repair_bridge(x.space(), y.space(), b);
  CHECK(bridge_violation(x.space(), y.space(), r) <= 1e-12);
  const Matrix gamma = Matrix::Constant(6, 5, 1.0 / 30);
  CHECK(bridge_violation(x.space(), y.space(), seed_bridge(x.space(), y.space(), gamma)) <= 1e-12);
}

TEST_CASE("identical spaces are at distance zero")
{
  const GridSpace x = build_circle_grid(1.0, 8);
  Matrix diag = Matrix::Zero(8, 8);
  for (Index i = 0; i < 8; ++i)
    diag(i, i) = 1.0 / 8;
  CHECK(d_upper_bound(x.space(), x.space(), diag).upper <= 1e-9);
  CHECK(d_upper_bound(x.space(), x.space()).upper <= 1e-9);
}

TEST_CASE("two-point spaces: bound agrees with a grid search")
{
  const MetricMeasureSpace x = build_two_point(1.0, 0.5), y = build_two_point(1.1, 0.5);
  Matrix id = Matrix::Zero(2, 2);
  id(0, 0) = id(1, 1) = 0.5;
  const DistanceBound b = d_upper_bound(x, y, id);
  const double ref = two_point_grid_search(1.0, 1.1);
  CHECK(ref == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(b.upper == doctest::Approx(ref).epsilon(1e-8));
  CHECK(bridge_violation(x, y, b.bridge) <= 1e-12);
}

TEST_CASE("alternation is monotone and returns a coupling")
{
  const GridSpace x = build_circle_grid(1.0, 8), y = build_circle_grid(1.0, 12);
  DistanceOptions opt;
  opt.restarts = 2;
  const DistanceBound b = d_upper_bound(x.space(), y.space(), {}, opt);
  REQUIRE(!b.history.empty());
  for (std::size_t k = 1; k < b.history.size(); ++k)
    CHECK(b.history[k] <= b.history[k - 1] + 1e-12);
  CHECK((b.coupling.rowwise().sum() - x.space().measure()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.coupling.colwise().sum().transpose() - y.space().measure()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(bridge_violation(x.space(), y.space(), b.bridge) <= 1e-12);
  CHECK(std::sqrt((b.coupling.array() * b.bridge.array().square()).sum()) == doctest::Approx(b.upper));
}

TEST_CASE("restarts are deterministic across thread counts")
{
  const GridSpace x = build_circle_grid(1.0, 6), y = build_circle_grid(1.2, 7);
  DistanceOptions one, many;
  one.restarts = many.restarts = 3;
  many.threads = 3;
  const DistanceBound a = d_upper_bound(x.space(), y.space(), {}, one);
  const DistanceBound b = d_upper_bound(x.space(), y.space(), {}, many);
  CHECK(a.upper == b.upper);
  CHECK(a.winning_start == b.winning_start);
}

TEST_CASE("even index embedding couples a circle with its refinement")
{
  const Matrix e = even_index_embedding(5);
  CHECK((e.rowwise().sum() - Vector::Constant(5, 0.2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((e.colwise().sum().transpose() - Vector::Constant(10, 0.1)).cwiseAbs().maxCoeff() < 1e-15);
  const DistanceBound b =
      d_upper_bound(build_circle_grid(1.0, 8).space(), build_circle_grid(1.0, 16).space(), even_index_embedding(8));
  CHECK(b.upper <= 1.0 / 32 + 1e-9);
}

TEST_CASE("invalid couplings are rejected")
{
  const GridSpace x = build_circle_grid(1.0, 4);
  CHECK_THROWS_AS(d_upper_bound(x.space(), x.space(), Matrix::Constant(4, 4, 0.1)), Error);
}
