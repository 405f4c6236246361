#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ricci/mmspace.hpp"
#include "ricci/transport.hpp"

using namespace ricci;

namespace
{

// Random points in the plane give a genuine metric.
MetricMeasureSpace random_planar(oracle::Rng &rng, int n, bool integer_coordinates)
{
  Matrix pts(n, 2);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 2; ++k)
      pts(i, k) = integer_coordinates ? rng.below(7) : rng.uniform();
  Matrix d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      d(i, j) = (pts.row(i) - pts.row(j)).norm();
  Vector m = Vector::Constant(n, 1.0 / n);
  return MetricMeasureSpace(d, m);
}

Vector rational_probability(oracle::Rng &rng, int n, int zeros_allowed)
{
  Vector v(n);
  for (int i = 0; i < n; ++i)
    v[i] = 1 + rng.below(9);
  for (int k = 0; k < zeros_allowed && n > 1; ++k)
    v[rng.below(n)] = 0;
  if (v.sum() == 0)
    v[0] = 1;
  return v / v.sum();
}

} // namespace

TEST_CASE("validate_space finds the worst triangle")
{
  Matrix d(3, 3);
  d << 0, 1, 3, 1, 0, 1, 3, 1, 0;
  const ValidationResult v = validate_space(MetricMeasureSpace(d, Vector::Constant(3, 1.0 / 3)));
  CHECK_FALSE(v.pass);
  CHECK(v.triangle_violation == doctest::Approx(1.0));
  CHECK(validate_space(build_circle_grid(1.0, 12).space()).pass);
  CHECK(validate_space(build_torus_grid(1.0, 2.0, 4, 5).space()).pass);
}

TEST_CASE("circle grid distances are arc lengths")
{
  const GridSpace g = build_circle_grid(2.0, 8);
  CHECK(g.h() == doctest::Approx(0.25));
  CHECK(g.space().d(0, 3) == doctest::Approx(0.75));
  CHECK(g.space().d(0, 6) == doctest::Approx(0.5));
  CHECK(g.space().diameter() == doctest::Approx(1.0));
}

TEST_CASE("product space distances add in squares")
{
  const MetricMeasureSpace x = build_two_point(1.0, 0.3);
  const GridSpace c = build_circle_grid(1.0, 4);
  const ProductSpace p = product_space(x, c.space());
  REQUIRE(p.space.size() == 8);
  for (Index a = 0; a < 8; ++a)
    for (Index b = 0; b < 8; ++b)
    {
      const auto [xa, ya] = p.map.split(a);
      const auto [xb, yb] = p.map.split(b);
      const double expect = std::hypot(x.d(xa, xb), c.space().d(ya, yb));
      CHECK(std::abs(p.space.d(a, b) - expect) < 1e-15);
    }
  CHECK(p.space.measure().sum() == doctest::Approx(1.0));
  CHECK(validate_space(p.space).pass);
  CHECK_THROWS_AS(product_space(x, c.space(), 4), Error);
}

TEST_CASE("restriction to an arc keeps distances and renormalizes mass")
{
  const GridSpace g = build_interval_grid(1.0, 20);
  const RestrictedSpace r = restrict_convex(g, [](const ModelPoint &p) { return p.x > 0.3 && p.x < 0.7; });
  REQUIRE(!r.indices.empty());
  CHECK(r.space.measure().sum() == doctest::Approx(1.0));
  for (std::size_t i = 0; i < r.indices.size(); ++i)
    for (std::size_t j = 0; j < r.indices.size(); ++j)
      CHECK(r.space.d(i, j) == g.space().d(r.indices[i], r.indices[j]));
  // Two disjoint arcs are not convex.
  CHECK_THROWS_AS(restrict_convex(g, [](const ModelPoint &p) { return p.x < 0.2 || p.x > 0.8; }), Error);
}

TEST_CASE("reweighting follows exp(-V)")
{
  const GridSpace g = build_circle_grid(1.0, 6);
  Vector v(6);
  v << 0, 1, 2, 0, 1, 2;
  const MetricMeasureSpace r = reweight(g.space(), v);
  CHECK(r.mass(1) / r.mass(0) == doctest::Approx(std::exp(-1.0)));
  CHECK(r.measure().sum() == doctest::Approx(1.0));
}

TEST_CASE("space JSON round trip")
{
  const GridSpace g = build_torus_grid(1.0, 1.5, 3, 4);
  const GridSpace back = grid_from_json(grid_to_json(g));
  CHECK(back.model() == ModelKind::torus);
  CHECK((back.space().distances() - g.space().distances()).cwiseAbs().maxCoeff() == 0.0);
  const MetricMeasureSpace tp = build_two_point(2.0, 0.25);
  const MetricMeasureSpace tp2 = space_from_json(space_to_json(tp));
  CHECK(tp2.d(0, 1) == 2.0);
  CHECK(tp2.mass(0) == 0.25);
}

TEST_CASE("exact transport matches vertex enumeration")
{
  oracle::Rng rng(11);
  for (int trial = 0; trial < 25; ++trial)
  {
    const int n = 2 + rng.below(3);
    const MetricMeasureSpace s = random_planar(rng, n, true);
    const Vector mu = rational_probability(rng, n, 1), nu = rational_probability(rng, n, 1);
    const ExactTransport ot = solve_w2_exact(s, mu, nu);
    const Matrix cost = s.distances().array().square();
    const oracle::VertexResult ref = oracle::transport_by_vertices(cost, mu, nu);
    CHECK(ot.plan.cost == doctest::Approx(ref.value).epsilon(1e-12));
    CHECK(std::abs(ot.duality_gap) <= 1e-10);
    CHECK((ot.plan.gamma.rowwise().sum() - mu).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ot.plan.gamma.colwise().sum().transpose() - nu).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("dual potentials are feasible and tight on the plan")
{
  oracle::Rng rng(5);
  const MetricMeasureSpace s = random_planar(rng, 6, false);
  const Vector mu = rational_probability(rng, 6, 0), nu = rational_probability(rng, 6, 0);
  const ExactTransport ot = solve_w2_exact(s, mu, nu);
  const Vector &phi = ot.potentials.phi, &psi = ot.potentials.phi_c;
  for (Index x = 0; x < 6; ++x)
    for (Index y = 0; y < 6; ++y)
    {
      const double c = 0.5 * s.d(x, y) * s.d(x, y);
      CHECK(phi[x] + psi[y] <= c + 1e-12);
      if (ot.plan.gamma(x, y) > 1e-14)
        CHECK(std::abs(phi[x] + psi[y] - c) < 1e-12);
    }
  CHECK(mu.dot(phi) + nu.dot(psi) == doctest::Approx(0.5 * ot.plan.cost).epsilon(1e-12));
  // The c-transform of phi can only improve the second potential.
  const Vector phic = c_transform(s, phi);
  for (Index y = 0; y < 6; ++y)
    CHECK(phic[y] >= psi[y] - 1e-12);
}

TEST_CASE("optimal plans are cyclically monotone and push forward to the target")
{
  oracle::Rng rng(9);
  const MetricMeasureSpace s = random_planar(rng, 5, false);
  const Vector mu = rational_probability(rng, 5, 0), nu = rational_probability(rng, 5, 0);
  const ExactTransport ot = solve_w2_exact(s, mu, nu);
  CHECK(check_cyclical_monotonicity(s, ot.plan, 4).pass);
  CHECK((push_forward_plan(ot.plan, mu) - nu).cwiseAbs().maxCoeff() < 1e-14);
  // The anti-optimal swap of a plan with two support cells is detected.
  TransportPlan bad = ot.plan;
  bad.gamma = mu * nu.transpose();
  Matrix cost = s.distances().array().square();
  if ((bad.gamma.array() * cost.array()).sum() > ot.plan.cost + 1e-9)
    CHECK_FALSE(check_cyclical_monotonicity(s, bad, 4).pass);
}

TEST_CASE("W1 matches vertex enumeration for the cost d")
{
  oracle::Rng rng(21);
  const MetricMeasureSpace s = random_planar(rng, 4, true);
  const Vector mu = rational_probability(rng, 4, 0), nu = rational_probability(rng, 4, 0);
  const oracle::VertexResult ref = oracle::transport_by_vertices(s.distances(), mu, nu);
  CHECK(w1(s, mu, nu) == doctest::Approx(ref.value).epsilon(1e-12));
}

TEST_CASE("entropic transport approaches the exact cost from above")
{
  oracle::Rng rng(3);
  const MetricMeasureSpace s = random_planar(rng, 6, false);
  const Vector mu = rational_probability(rng, 6, 0), nu = rational_probability(rng, 6, 0);
  const double exact = solve_w2_exact(s, mu, nu).plan.cost;
  double previous = kInf;
  for (double eps : {1e-1, 1e-2, 1e-3})
  {
    const EntropicTransport et = solve_entropic(s, mu, nu, eps);
    CHECK(et.converged);
    CHECK(et.plan.cost >= exact - 1e-12);
    CHECK(et.plan.cost <= previous + 1e-12);
    previous = et.plan.cost;
  }
  CHECK(previous - exact < 1e-2);
}

TEST_CASE("transport rejects non-probability inputs")
{
  const GridSpace g = build_circle_grid(1.0, 4);
  Vector mu = Vector::Constant(4, 0.25), nu = Vector::Constant(4, 0.3);
  CHECK_THROWS_AS(solve_w2_exact(g.space(), mu, nu), Error);
  nu << 0.5, 0.5, 0.5, -0.5;
  CHECK_THROWS_AS(solve_w2_exact(g.space(), mu, nu), Error);
}
