#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ricci/hopflax.hpp"
#include "ricci/kernel_sim.hpp"

using namespace ricci;

namespace
{

MetricMeasureSpace random_planar(oracle::Rng &rng, int n)
{
  Matrix pts(n, 2);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 2; ++k)
      pts(i, k) = rng.uniform();
  Matrix d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      d(i, j) = (pts.row(i) - pts.row(j)).norm();
  return MetricMeasureSpace(d, Vector::Constant(n, 1.0 / n));
}

Vector random_vector(oracle::Rng &rng, Index n)
{
  Vector v(n);
  for (Index i = 0; i < n; ++i)
    v[i] = rng.normal();
  return v;
}

} // namespace

TEST_CASE("Hopf-Lax matches direct minimization")
{
  oracle::Rng rng(6);
  const MetricMeasureSpace s = random_planar(rng, 9);
  const Vector g = random_vector(rng, 9);
  for (double t : {0.01, 0.3, 5.0})
  {
    const HopfLaxState st = hopf_lax(s, g, t);
    CHECK((st.values - oracle::hopf_lax(s.distances(), g, t)).cwiseAbs().maxCoeff() == 0.0);
    for (Index x = 0; x < 9; ++x)
      for (Index y : st.argmin[x])
        CHECK(g[y] + s.d(x, y) * s.d(x, y) / (2 * t) == doctest::Approx(st.values[x]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(hopf_lax(s, g, 0.0), Error);
}

TEST_CASE("Hopf-Lax on the two-point space")
{
  const MetricMeasureSpace s = build_two_point(1.0, 0.5);
  Vector g(2);
  g << 0.0, -2.0;
  const HopfLaxState st = hopf_lax(s, g, 0.25);
  CHECK(st.values[0] == doctest::Approx(std::min(0.0, -2.0 + 2.0)));
  CHECK(st.values[1] == -2.0);
  // Both points attain the minimum at x = 0.
  CHECK(st.argmin[0].size() == 2);
  const DistanceFunctionals dd = dplus_dminus(s, st);
  CHECK(dd.plus[0] == 1.0);
  CHECK(dd.minus[0] == 0.0);
}

TEST_CASE("Hopf-Lax semigroup properties")
{
  oracle::Rng rng(13);
  for (int trial = 0; trial < 5; ++trial)
  {
    const MetricMeasureSpace s = random_planar(rng, 10);
    const Vector g = random_vector(rng, 10);
    const double t = 0.2 + rng.uniform(), u = 0.1 + rng.uniform();
    const Vector qt = hopf_lax(s, g, t).values;
    const Vector qtu = hopf_lax(s, g, t + u).values;
    const Vector iterated = hopf_lax(s, qt, u).values;
    // Q_{t+u} <= Q_u Q_t, Q_t g <= g, and t -> Q_t g is nonincreasing.
    CHECK((qtu - iterated).maxCoeff() <= 1e-14);
    CHECK((qt - g).maxCoeff() <= 0.0);
    CHECK((qtu - qt).maxCoeff() <= 1e-15);
    const HopfLaxState st = hopf_lax(s, g, t);
    const DistanceFunctionals dd = dplus_dminus(s, st);
    CHECK((dd.minus - dd.plus).maxCoeff() <= 0.0);
  }
}

TEST_CASE("Hamilton-Jacobi identity is first order in dt")
{
  oracle::Rng rng(15);
  const MetricMeasureSpace s = random_planar(rng, 12);
  const Vector g = random_vector(rng, 12);
  const CheckResult a = hj_identity_check(s, g, 1.0, 1e-3);
  const CheckResult b = hj_identity_check(s, g, 1.0, 1e-4);
  CHECK(a.pass);
  CHECK(b.pass);
  CHECK(b.measured_slack <= 0.2 * a.measured_slack + 1e-14);
}

TEST_CASE("product Hopf-Lax factorizes")
{
  oracle::Rng rng(19);
  const MetricMeasureSpace x = random_planar(rng, 4), y = random_planar(rng, 3);
  const Vector g = random_vector(rng, 12);
  CHECK(product_hj_check(x, y, g, 0.7, 1e-4).pass);
}

TEST_CASE("heat kernel on the cycle matches the Fourier series")
{
  const HeatOperator ho(cycle_structure(12));
  for (double t : {0.01, 0.5, 2.0})
  {
    const HeatKernel k = heat_kernel(ho, t);
    CHECK((k.p - oracle::cycle_kernel(12, t)).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(((k.p * Vector::Constant(12, 1.0 / 12)).array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(symmetry_check(k).pass);
  }
  CHECK(chapman_kolmogorov_check(ho, 0.1, 0.3).pass);
}

TEST_CASE("two-point heat kernel in closed form")
{
  const oracle::TwoPoint tp{0.3, 1.0};
  const HeatOperator ho(two_point_structure(tp.w, tp.a));
  const HeatKernel k = heat_kernel(ho, 0.4);
  CHECK((k.p - tp.kernel(0.4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(k.clipped_mass == 0.0);
}

TEST_CASE("W1 decays against L1 of kernels on the two-point space")
{
  const GridSpace g = GridSpace::wrap(build_two_point(1.0, 0.5));
  const HeatOperator ho(two_point_structure(1.0, 0.5));
  for (double t : {0.01, 0.1, 1.0})
    CHECK(w1_l1_check(g, ho, 4.0, t, {{0, 1}}).pass);
}

TEST_CASE("sample paths are valid and reproducible")
{
  const DirichletStructure ds = random_graph_structure(6, 0.5, 2);
  const SamplePath p = sample_brownian(ds, 0, 3.0, 42, 7);
  const SamplePath q = sample_brownian(ds, 0, 3.0, 42, 7);
  const SamplePath r = sample_brownian(ds, 0, 3.0, 42, 8);
  CHECK(p.jump_times == q.jump_times);
  CHECK(p.states == q.states);
  CHECK((p.jump_times != r.jump_times || p.states != r.states));
  REQUIRE(p.states.size() == p.jump_times.size() + 1);
  for (std::size_t k = 0; k < p.jump_times.size(); ++k)
  {
    CHECK(p.jump_times[k] > 0.0);
    CHECK(p.jump_times[k] <= 3.0);
    if (k > 0)
      CHECK(p.jump_times[k] > p.jump_times[k - 1]);
    CHECK(ds.weights()(p.states[k], p.states[k + 1]) > 0.0);
  }
  CHECK(p.state_at(0.0) == 0);
}

TEST_CASE("empirical law is thread-count invariant")
{
  const DirichletStructure ds = two_point_structure(1.0, 0.5);
  const HeatOperator ho(ds);
  const CheckResult a = empirical_vs_kernel_check(ds, ho, 0, 0.5, 20000, 3, 1);
  const CheckResult b = empirical_vs_kernel_check(ds, ho, 0, 0.5, 20000, 3, 3);
  CHECK(a.measured_slack == b.measured_slack);
  CHECK(a.pass);
}
