#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ricci/entropy_geo.hpp"
#include "ricci/evi_lab.hpp"

using namespace ricci;

namespace
{

Vector bump(const GridSpace &g, double center, double kappa)
{
  const Vector &m = g.space().measure();
  Vector mu(g.size());
  for (Index i = 0; i < g.size(); ++i)
    mu[i] = m[i] * std::exp(kappa * std::cos(2.0 * M_PI * (g.coordinate(i).x / g.length() - center)));
  return mu / mu.sum();
}

Vector random_vector(oracle::Rng &rng, Index n)
{
  Vector v(n);
  for (Index i = 0; i < n; ++i)
    v[i] = rng.normal();
  return v;
}

} // namespace

TEST_CASE("relative entropy")
{
  Vector m(3), mu(3);
  m << 0.2, 0.3, 0.5;
  CHECK(relative_entropy(m, m) == 0.0);
  mu << 0.5, 0.5, 0.0;
  const double expect = 0.5 * std::log(0.5 / 0.2) + 0.5 * std::log(0.5 / 0.3);
  CHECK(relative_entropy(mu, m) == doctest::Approx(expect).epsilon(1e-15));
  oracle::Rng rng(1);
  for (int k = 0; k < 20; ++k)
  {
    Vector p = random_vector(rng, 3).array().exp();
    p /= p.sum();
    CHECK(relative_entropy(p, m) >= 0.0);
  }
  Vector zero_m(3);
  zero_m << 0.5, 0.5, 0.0;
  Vector charge(3);
  charge << 0.2, 0.2, 0.6;
  CHECK(relative_entropy(charge, zero_m) == kInf);
}

TEST_CASE("Fisher information on the two-point space")
{
  const oracle::TwoPoint tp{0.35, 2.0};
  const DirichletStructure ds = two_point_structure(tp.w, tp.a);
  Vector rho(2);
  rho << 0.4 / tp.a, 0.6 / tp.b();
  CHECK(fisher_information(ds, rho) == doctest::Approx(tp.fisher(rho)).epsilon(1e-14));
}

TEST_CASE("displacement interpolation endpoints and marginals")
{
  const GridSpace g = build_circle_grid(1.0, 32);
  const Vector mu0 = bump(g, 0.0, 1.0), mu1 = bump(g, 0.4, 1.5);
  const GeodesicPlan plan = displacement_interpolation(g, mu0, mu1, 8);
  CHECK((plan.marginal(0, g.size()) - mu0).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((plan.marginal(8, g.size()) - mu1).cwiseAbs().maxCoeff() < 1e-14);
  for (Index k = 0; k <= 8; ++k)
  {
    const Vector mk = plan.marginal(k, g.size());
    CHECK(mk.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mk.minCoeff() >= 0.0);
  }
  CHECK(plan.w2_squared == doctest::Approx(solve_w2_exact(g.space(), mu0, mu1).plan.cost));
  CHECK(plan.rounding <= 0.5 * g.h() + 1e-12);
}

TEST_CASE("entropy is displacement convex on the flat circle")
{
  const GridSpace g = build_circle_grid(4.0 * M_PI, 64);
  const Vector mu0 = bump(g, 0.0, 1.0), mu1 = bump(g, 0.375, 1.0);
  CHECK(cd_convexity_check(g, mu0, mu1, 0.0, 16).pass);
  CHECK_FALSE(cd_convexity_check(g, mu0, mu1, 10.0, 16).pass);
  const GeodesicPlan plan = displacement_interpolation(g, mu0, mu1, 16);
  std::vector<double> F(plan.paths.size(), 1.0);
  CHECK(strong_cd_weighted_check(g, plan, F, 0.0).pass);
  CHECK(interpolation_bound_check(g, plan, 0.0).pass);
  CHECK(metric_brenier_check(g, mu0, mu1).pass);
}

TEST_CASE("the cd budget grows with the log densities")
{
  const GridSpace g = build_circle_grid(1.0, 32);
  const Vector u = g.space().measure();
  const double flat = cd_budget(g, u, u, 8.0);
  CHECK(flat == doctest::Approx(8.0 * g.h()));
  CHECK(cd_budget(g, bump(g, 0.0, 3.0), u, 8.0) > flat);
}

TEST_CASE("I_K")
{
  CHECK(ik(0.0, 2.0) == 2.0);
  CHECK(ik(1e-16, 2.0) == doctest::Approx(2.0));
  CHECK(ik(2.0, 0.5) == doctest::Approx((std::exp(1.0) - 1.0) / 2.0).epsilon(1e-15));
  CHECK(ik(-1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("heat flow matches the two-point closed form")
{
  const oracle::TwoPoint tp{0.5, 1.0};
  const HeatOperator ho(two_point_structure(tp.w, tp.a));
  Vector rho(2);
  rho << 1.6, 0.4;
  const FlowTrajectory traj = heat_flow(ho, rho, {0.0, 0.1, 1.0});
  REQUIRE(traj.densities.size() == 3);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK((traj.densities[k] - tp.heat(rho, traj.times[k])).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(traj.provenance == "heat");
}

TEST_CASE("two-point curvature constants")
{
  const oracle::TwoPoint tp{0.5, 1.0};
  const HeatOperator ho(two_point_structure(tp.w, tp.a));
  const double K = tp.bakry_emery_constant();
  CHECK(K == doctest::Approx(4.0).epsilon(1e-12));
  oracle::Rng rng(2);
  for (int k = 0; k < 10; ++k)
  {
    const Vector f = random_vector(rng, 2);
    CHECK(bakry_emery_check(ho, f, K, {0.01, 0.1, 1.0}).pass);
    CHECK(lipschitz_regularization_check(ho, f, K, {0.01, 0.1, 1.0}).pass);
  }
  Vector anti(2);
  anti << 1.0, -1.0;
  CHECK_FALSE(bakry_emery_check(ho, anti, K + 0.5, {0.01, 0.1, 1.0}).pass);
  CHECK(log_sobolev_check(ho, tp.log_sobolev_constant(), 200, 1).pass);
  CHECK_FALSE(log_sobolev_check(ho, tp.log_sobolev_constant() + 0.5, 200, 1).pass);
  CHECK_THROWS_AS(log_sobolev_check(ho, 0.0, 10, 1), Error);
}

TEST_CASE("EVI and contraction on the flat circle")
{
  const GridSpace g = build_circle_grid(4.0 * M_PI, 32);
  const HeatOperator ho(grid_structure(g));
  const Vector mu = bump(g, 0.0, 1.0), nu = bump(g, 0.375, 1.0);
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
  const CheckResult evi = evi_check(g, ho, mu, nu, 0.0, times);
  CHECK(evi.pass);
  CHECK(evi.diagnostics.columns.size() >= 4);
  CHECK_FALSE(evi_check(g, ho, mu, nu, 10.0, times).pass);
  CHECK(contraction_check(g, ho, mu, nu, 0.0, times).pass);
  CHECK(ultra_evi_check(g, ho, mu, 0.0, times).pass);
}

TEST_CASE("entropy dissipation equals the integrated Gamma(rho, log rho)")
{
  const GridSpace g = build_circle_grid(1.0, 24);
  const HeatOperator ho(grid_structure(g));
  const Vector rho = density_of(bump(g, 0.1, 2.0), g.space().measure());
  CHECK(dissipation_check(ho, rho, {0.001, 0.01, 0.1}).pass);
  CHECK_THROWS_AS(dissipation_check(ho, rho, {0.0, 0.1}), Error);
}

TEST_CASE("JKO steps keep positivity and mass, and relax toward equilibrium")
{
  const GridSpace g = build_circle_grid(1.0, 32);
  const Vector &m = g.space().measure();
  const Vector rho0 = density_of(bump(g, 0.0, 1.0), m);
  std::vector<JkoStepInfo> info;
  const FlowTrajectory traj = jko_flow(g, rho0, 5e-3, 6, {}, &info);
  REQUIRE(traj.densities.size() == 7);
  double previous = kInf;
  for (const Vector &rho : traj.densities)
  {
    CHECK(rho.minCoeff() > 0.0);
    CHECK(m.dot(rho) == doctest::Approx(1.0).epsilon(1e-12));
    const double ent = density_entropy(rho, m);
    CHECK(ent <= previous + 1e-14);
    previous = ent;
  }
  for (const auto &s : info)
    CHECK(s.kkt_residual <= 1e-7);
}

TEST_CASE("derivative identities along the heat flow")
{
  const GridSpace g = build_circle_grid(1.0, 32);
  const DirichletStructure ds = grid_structure(g);
  const HeatOperator ho(ds);
  const Vector &m = g.space().measure();
  const Vector rho0 = density_of(bump(g, 0.0, 1.0), m);
  const Vector sigma = bump(g, 0.4, 1.0);
  CHECK(derivative_w2_check(g, ho, rho0, sigma, 0.1, {1e-3, 1e-4}).pass);
  CHECK(derivative_entropy_check(g, ds, rho0, density_of(sigma, m), 0.0, {1e-3, 1e-4}).pass);
}
