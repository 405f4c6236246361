#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ricci/dirichlet.hpp"

using namespace ricci;

namespace
{

Vector random_vector(oracle::Rng &rng, Index n)
{
  Vector v(n);
  for (Index i = 0; i < n; ++i)
    v[i] = rng.normal();
  return v;
}

// Gamma straight from the weight table.
Vector gamma_oracle(const Matrix &w, const Vector &m, const Vector &f, const Vector &g)
{
  Vector out = Vector::Zero(f.size());
  for (Index x = 0; x < f.size(); ++x)
  {
    for (Index y = 0; y < f.size(); ++y)
      out[x] += w(x, y) * (f[y] - f[x]) * (g[y] - g[x]);
    out[x] /= 2.0 * m[x];
  }
  return out;
}

Matrix generator_oracle(const Matrix &w, const Vector &m)
{
  Matrix a = w;
  for (Index x = 0; x < w.rows(); ++x)
  {
    a(x, x) = -w.row(x).sum() + w(x, x);
    a.row(x) /= m[x];
  }
  return a;
}

} // namespace

TEST_CASE("Dirichlet form basics on random graphs")
{
  oracle::Rng rng(17);
  for (std::uint64_t seed : {1u, 2u, 3u})
  {
    const DirichletStructure ds = random_graph_structure(12, 0.3, seed);
    const Vector &m = ds.measure();
    const Vector f = random_vector(rng, 12), g = random_vector(rng, 12);
    CHECK(ds.form(f, g) == doctest::Approx(ds.form(g, f)).epsilon(1e-14));
    CHECK(ds.form(f, f) >= 0.0);
    CHECK(std::abs(ds.form(Vector::Ones(12), f)) < 1e-13);
    // Integration by parts.
    CHECK(std::abs(m.dot(g.cwiseProduct(ds.laplacian(f))) + ds.form(f, g)) < 1e-12);
    CHECK((ds.gamma(f, g) - gamma_oracle(ds.weights(), m, f, g)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(ds.cheeger(f) == doctest::Approx(0.5 * ds.form(f, f)));
    CHECK(m.dot(ds.gamma(f)) == doctest::Approx(ds.form(f, f)).epsilon(1e-13));
  }
}

TEST_CASE("energy measure identity against the direct integral")
{
  oracle::Rng rng(4);
  const DirichletStructure ds = cycle_structure(16);
  for (int k = 0; k < 10; ++k)
  {
    const Vector f = random_vector(rng, 16), phi = random_vector(rng, 16);
    const double direct = ds.measure().dot(phi.cwiseProduct(gamma_oracle(ds.weights(), ds.measure(), f, f)));
    CHECK(std::abs(energy_measure(ds, f, phi) - direct) < 1e-12);
  }
  // phi = 1 gives back the form.
  const Vector f = random_vector(rng, 16);
  CHECK(energy_measure(ds, f, Vector::Ones(16)) == doctest::Approx(ds.form(f, f)).epsilon(1e-13));
}

TEST_CASE("heat semigroup matches the matrix exponential of the generator")
{
  const DirichletStructure ds = random_graph_structure(10, 0.4, 7);
  const HeatOperator ho(ds);
  const Matrix a = generator_oracle(ds.weights(), ds.measure());
  for (double t : {0.01, 0.3, 2.0})
    CHECK((ho.matrix(t) - oracle::expm(a, t)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("implicit Euler agrees with the spectral semigroup")
{
  const DirichletStructure ds = cycle_structure(16);
  const HeatOperator spec(ds, HeatMode::spectral), euler(ds, HeatMode::implicit_euler, 1e-3);
  oracle::Rng rng(8);
  const Vector f = random_vector(rng, 16);
  for (double t : {0.05, 0.5})
    CHECK((spec.apply(f, t) - euler.apply(f, t)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("heat semigroup properties")
{
  const DirichletStructure ds = random_graph_structure(14, 0.25, 3);
  const HeatOperator ho(ds);
  const Vector &m = ds.measure();
  oracle::Rng rng(12);
  const Vector f = random_vector(rng, 14), g = random_vector(rng, 14);
  for (double t : {0.1, 1.0})
  {
    // Self-adjoint in L2(m), mass preserving, order preserving and an L-infinity contraction.
    CHECK(std::abs(m.dot(g.cwiseProduct(ho.apply(f, t))) - m.dot(f.cwiseProduct(ho.apply(g, t)))) < 1e-10);
    CHECK(m.dot(ho.apply(f, t)) == doctest::Approx(m.dot(f)).epsilon(1e-12));
    const Vector pos = f.cwiseAbs();
    CHECK(ho.apply(pos, t).minCoeff() >= -1e-14);
    CHECK(ho.apply(f, t).cwiseAbs().maxCoeff() <= f.cwiseAbs().maxCoeff() + 1e-12);
    // L1(m) contraction.
    CHECK(m.dot(ho.apply(f, t).cwiseAbs()) <= m.dot(f.cwiseAbs()) + 1e-12);
  }
  // Semigroup law.
  CHECK((ho.apply(ho.apply(f, 0.2), 0.3) - ho.apply(f, 0.5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ho.spectral_gap() > 0.0);
}

TEST_CASE("two-point heat flow and Gamma in closed form")
{
  const oracle::TwoPoint tp{0.3, 1.7};
  const DirichletStructure ds = two_point_structure(tp.w, tp.a);
  const HeatOperator ho(ds);
  Vector f(2);
  f << 0.4, -1.3;
  for (double t : {0.0, 0.05, 0.7, 3.0})
    CHECK((ho.apply(f, t) - tp.heat(f, t)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ds.gamma(f) - tp.gamma(f)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(ho.spectral_gap() == doctest::Approx(tp.gap()).epsilon(1e-13));
}

TEST_CASE("Gamma identities hold to roundoff")
{
  oracle::Rng rng(99);
  const DirichletStructure ds = random_graph_structure(20, 0.2, 5);
  for (int k = 0; k < 10; ++k)
  {
    const Vector f = random_vector(rng, 20), g = random_vector(rng, 20), h = random_vector(rng, 20);
    CHECK(leibnitz_check(ds, f, g, h).pass);
    CHECK(parallelogram_check(ds, f, g).pass);
  }
}

TEST_CASE("energy measure limit converges at first order")
{
  const DirichletStructure ds = two_point_structure(1.0, 0.5);
  const HeatOperator ho(ds);
  Vector f(2);
  f << 1.0, -2.0;
  const CheckResult r = energy_measure_limit_check(ho, f, {1e-2, 1e-3, 1e-4});
  CHECK(r.pass);
  CHECK_THROWS_AS(energy_measure_limit_check(ho, f, {1e-3, 1e-2}), Error);
}

TEST_CASE("intrinsic distance bounds bracket")
{
  const DirichletStructure ds = cycle_structure(8);
  for (Index y : {1, 3, 4})
  {
    const IntrinsicBounds b = intrinsic_distance_bounds(ds, 0, y);
    CHECK(b.lower <= b.upper + 1e-12);
    CHECK(b.lower > 0.0);
  }
  const IntrinsicBounds same = intrinsic_distance_bounds(ds, 2, 2);
  CHECK(same.upper == 0.0);
}

TEST_CASE("product structures tensorize")
{
  oracle::Rng rng(31);
  const DirichletStructure x = two_point_structure(1.0, 0.4), y = cycle_structure(5);
  const ProductStructure p = product_structure(x, y);
  const Vector f = random_vector(rng, p.map.size());
  const CheckResult r = tensorization_check(x, y, p.ds, f, {0.05, 0.5});
  CHECK(r.pass);
  // The generator of the product is the sum of the factor generators.
  const HeatOperator hp(p.ds);
  CHECK(hp.spectral_gap() == doctest::Approx(std::min(HeatOperator(x).spectral_gap(),
                                                      HeatOperator(y).spectral_gap()))
                                 .epsilon(1e-10));
  CHECK_THROWS_AS(tensorization_check(x, y, cycle_structure(10), Vector::Zero(10), {0.1}), Error);
}

TEST_CASE("restriction leaves interior Gamma unchanged")
{
  const GridSpace g = build_interval_grid(1.0, 40);
  const DirichletStructure ds = grid_structure(g);
  const RestrictedSpace sub = restrict_convex(g, [](const ModelPoint &p) { return p.x > 0.2 && p.x < 0.8; });
  Vector f = Vector::Zero(40);
  for (Index i = 0; i < 40; ++i)
  {
    const double x = g.coordinate(i).x;
    if (x > 0.35 && x < 0.65)
      f[i] = std::sin(M_PI * (x - 0.35) / 0.3);
  }
  CHECK(restriction_check(g, ds, sub, f).pass);
}

TEST_CASE("Dirichlet structures reject zero masses and asymmetric weights")
{
  Matrix d(2, 2);
  d << 0, 1, 1, 0;
  Vector m(2);
  m << 1.0, 0.0;
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  CHECK_THROWS_AS(DirichletStructure(MetricMeasureSpace(d, m), w), Error);
  m << 0.5, 0.5;
  w << 0, 1, 2, 0;
  CHECK_THROWS_AS(DirichletStructure(MetricMeasureSpace(d, m), w), Error);
}
