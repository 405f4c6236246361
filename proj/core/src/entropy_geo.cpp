#include "ricci/entropy_geo.hpp"

#include <algorithm>
#include <cmath>

namespace ricci
{

double relative_entropy(const Vector &mu, const Vector &m)
{
  if (mu.size() != m.size())
    throw Error("measure sizes differ");
  double s = 0.0;
  for (Index i = 0; i < mu.size(); ++i)
  {
    if (!(mu[i] > 0.0))
      continue;
    if (!(m[i] > 0.0))
      return kInf;
    s += mu[i] * std::log(mu[i] / m[i]);
  }
  return s;
}

double fisher_information(const DirichletStructure &ds, const Vector &rho)
{
  if (rho.size() != ds.size())
    throw Error("density size does not match the structure");
  if (rho.minCoeff() < 0.0)
    throw Error("density must be nonnegative");
  return 4.0 * ds.cheeger(rho.cwiseSqrt());
}

Vector density_of(const Vector &mu, const Vector &m)
{
  Vector rho = Vector::Zero(mu.size());
  for (Index i = 0; i < mu.size(); ++i)
  {
    if (m[i] > 0.0)
      rho[i] = mu[i] / m[i];
    else if (mu[i] > 0.0)
      throw Error("measure charges an m-null point; no density exists");
  }
  return rho;
}

Vector measure_of(const Vector &rho, const Vector &m) { return rho.cwiseProduct(m); }

Vector GeodesicPlan::marginal(Index k, Index size, const std::vector<double> *factors) const
{
  Vector mu = Vector::Zero(size);
  for (std::size_t p = 0; p < paths.size(); ++p)
  {
    const double w = paths[p].weight * (factors ? (*factors)[p] : 1.0);
    mu[paths[p].points[k]] += w;
  }
  return mu;
}

GeodesicPlan displacement_interpolation(const GridSpace &grid, const Vector &mu0, const Vector &mu1, Index steps)
{
  if (steps < 1)
    throw Error("displacement interpolation needs at least one time step");
  if (!grid.has_model() && steps > 1)
    throw Error("interior interpolation times need a model grid with known geodesics");
  const ExactTransport ot = solve_w2_exact(grid.space(), mu0, mu1);
  GeodesicPlan plan;
  plan.steps = steps;
  plan.mu0 = mu0;
  plan.mu1 = mu1;
  plan.w2_squared = ot.plan.cost;
  plan.alternative_optima = ot.alternative_optima;
  const Matrix &g = ot.plan.gamma;
  for (Index x = 0; x < g.rows(); ++x)
  {
    for (Index y = 0; y < g.cols(); ++y)
    {
      if (!(g(x, y) > 0.0))
        continue;
      GeodesicPath path;
      path.weight = g(x, y);
      path.points.resize(steps + 1);
      path.points.front() = x;
      path.points.back() = y;
      for (Index k = 1; k < steps; ++k)
      {
        const ModelPoint p = grid.geodesic_point(x, y, plan.time(k));
        const Index r = grid.nearest(p);
        path.points[k] = r;
        path.rounding = std::max(path.rounding, grid.model_distance(p, grid.coordinate(r)));
      }
      plan.rounding = std::max(plan.rounding, path.rounding);
      plan.paths.push_back(std::move(path));
    }
  }
  return plan;
}

namespace
{

double log_sup(const Vector &mu, const Vector &m)
{
  double s = 0.0;
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0 && m[i] > 0.0)
      s = std::max(s, std::abs(std::log(mu[i] / m[i])));
  return s;
}

CheckResult convexity_along(const GridSpace &grid, const GeodesicPlan &plan, const std::vector<double> *factors,
                            const Vector &end0, const Vector &end1, double w2sq, double K, double c_tol,
                            const std::string &name, const std::string &anchor)
{
  const Vector &m = grid.space().measure();
  const double e0 = relative_entropy(end0, m);
  const double e1 = relative_entropy(end1, m);
  if (!std::isfinite(e0) || !std::isfinite(e1))
    throw Error("convexity check needs endpoints of finite entropy");
  const double budget = cd_budget(grid, end0, end1, c_tol);
  CheckResult r;
  r.diagnostics.columns = {"t", "entropy", "chord", "curvature_term", "defect"};
  double worst = 0.0;
  for (Index k = 0; k <= plan.steps; ++k)
  {
    const double t = plan.time(k);
    const Vector mut = plan.marginal(k, grid.size(), factors);
    const double et = relative_entropy(mut, m);
    const double chord = (1.0 - t) * e0 + t * e1;
    const double curv = 0.5 * K * t * (1.0 - t) * w2sq;
    const double defect = et - chord + curv;
    worst = std::max(worst, defect);
    r.diagnostics.add_row({t, et, chord, curv, defect});
  }
  r.name = name;
  r.anchor = anchor;
  r.measured_slack = worst;
  r.tolerance = budget;
  r.finalize();
  r.set("K", K);
  r.set("h", grid.h());
  r.set("steps", plan.steps);
  r.set("C_tol", c_tol);
  r.set("w2_squared", w2sq);
  r.set("rounding", plan.rounding);
  r.set("alternative_optima", plan.alternative_optima);
  return r;
}

} // namespace

double cd_budget(const GridSpace &grid, const Vector &mu0, const Vector &mu1, double c_tol)
{
  const Vector &m = grid.space().measure();
  return c_tol * grid.h() * (1.0 + log_sup(mu0, m) + log_sup(mu1, m));
}

CheckResult cd_convexity_check(const GridSpace &grid, const Vector &mu0, const Vector &mu1, double K, Index steps,
                               double c_tol)
{
  const Vector &m = grid.space().measure();
  if (!std::isfinite(relative_entropy(mu0, m)) || !std::isfinite(relative_entropy(mu1, m)))
    throw Error("convexity check needs endpoints of finite entropy");
  const GeodesicPlan plan = displacement_interpolation(grid, mu0, mu1, steps);
  return convexity_along(grid, plan, nullptr, mu0, mu1, plan.w2_squared, K, c_tol, "cd_convexity",
                         "K-convexity of the entropy along a displacement interpolation");
}

CheckResult strong_cd_weighted_check(const GridSpace &grid, const GeodesicPlan &plan, const std::vector<double> &F,
                                     double K, double c_tol)
{
  if (F.size() != plan.paths.size())
    throw Error("one weight factor per path is required");
  double total = 0.0;
  std::size_t charged = 0;
  for (std::size_t p = 0; p < F.size(); ++p)
  {
    if (!(F[p] >= 0.0) || !std::isfinite(F[p]))
      throw Error("path weight factors must be finite and nonnegative");
    total += F[p] * plan.paths[p].weight;
    charged += F[p] * plan.paths[p].weight > 0.0 ? 1 : 0;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error("reweighted plan must have unit mass, got " + format_double(total));
  const Vector end0 = plan.marginal(0, grid.size(), &F);
  const Vector end1 = plan.marginal(plan.steps, grid.size(), &F);
  const double w2sq = solve_w2_exact(grid.space(), end0, end1).plan.cost;
  CheckResult r = convexity_along(grid, plan, &F, end0, end1, w2sq, K, c_tol, "strong_cd_weighted",
                                  "K-convexity of the entropy along a reweighted optimal geodesic plan");
  r.set("charged_paths", static_cast<long long>(charged));
  r.set("degenerate", charged <= 1);
  return r;
}

CheckResult interpolation_bound_check(const GridSpace &grid, const GeodesicPlan &plan, double K, double c)
{
  const Vector &m = grid.space().measure();
  double S = 0.0;
  for (const GeodesicPath &p : plan.paths)
    S = std::max(S, grid.space().d(p.points.front(), p.points.back()));
  const double kminus = std::max(0.0, -K);
  const double r0 = density_of(plan.mu0, m).maxCoeff();
  const double r1 = density_of(plan.mu1, m).maxCoeff();
  CheckResult r;
  r.diagnostics.columns = {"t", "sup_density", "bound"};
  double worst = 0.0;
  for (Index k = 0; k <= plan.steps; ++k)
  {
    const double t = plan.time(k);
    const double sup = density_of(plan.marginal(k, grid.size()), m).maxCoeff();
    const double bound = std::exp(kminus * t * (1.0 - t) * S * S / 2.0) * std::pow(r0, 1.0 - t) * std::pow(r1, t);
    worst = std::max(worst, sup / bound - 1.0);
    r.diagnostics.add_row({t, sup, bound});
  }
  r.name = "interpolation_bound";
  r.anchor = "uniform density bound along the interpolation";
  r.measured_slack = worst;
  r.tolerance = c * grid.h();
  r.finalize();
  r.set("K", K);
  r.set("support_diameter", S);
  r.set("h", grid.h());
  return r;
}

CheckResult metric_brenier_check(const GridSpace &grid, const Vector &mu0, const Vector &mu1,
                                 const BrenierThresholds &thresholds)
{
  const MetricMeasureSpace &s = grid.space();
  require_probability(mu0, "source measure");
  require_probability(mu1, "target measure");
  const ExactTransport ot = solve_w2_exact(s, mu0, mu1);
  const Vector &phi = ot.potentials.phi;
  const Index n = s.size();
  const Vector &m = s.measure();
  const double h = grid.h();
  double max_spread = 0.0;
  double max_mismatch = 0.0;
  double max_expansion = 0.0;
  double worst = 0.0;
  CheckResult r;
  r.diagnostics.columns = {"x", "spread", "mean_distance", "slope", "expansion"};
  for (Index x = 0; x < n; ++x)
  {
    if (!(mu0[x] > 0.0))
      continue;
    double lo = kInf, hi = 0.0, mass = 0.0, mean = 0.0, expansion = 0.0;
    for (Index y = 0; y < n; ++y)
    {
      const double g = ot.plan.gamma(x, y);
      if (!(g > 0.0))
        continue;
      lo = std::min(lo, s.d(x, y));
      hi = std::max(hi, s.d(x, y));
      mass += g;
      mean += g * s.d(x, y);
      // A source cell of width h lands on an interval of length h rho0(x) / rho1(y).
      expansion = std::max(expansion, (mu0[x] / m[x]) / (mu1[y] / m[y]));
    }
    mean /= mass;
    // Local slope over grid neighbours, or over nearest neighbours when no model is known.
    double slope = 0.0;
    if (grid.has_model())
    {
      for (const auto &[y, sq] : grid.stencil(x))
        slope = std::max(slope, std::abs(phi[y] - phi[x]) / std::sqrt(sq));
    }
    else
    {
      double nearest = kInf;
      for (Index y = 0; y < n; ++y)
        if (y != x && s.mass(y) > 0.0)
          nearest = std::min(nearest, s.d(x, y));
      for (Index y = 0; y < n; ++y)
        if (y != x && s.mass(y) > 0.0 && s.d(x, y) <= nearest * (1.0 + 1e-12))
          slope = std::max(slope, std::abs(phi[y] - phi[x]) / s.d(x, y));
    }
    // The one-sided slope is off by h |phi''| / 2 with phi'' = 1 - T' bounded by 1 + expansion.
    const double spread_tol = h * (thresholds.spread_factor + expansion) + 1e-12;
    const double slope_tol = h * (thresholds.slope_factor + 0.5 * (1.0 + expansion)) + 1e-12;
    max_spread = std::max(max_spread, hi - lo);
    max_mismatch = std::max(max_mismatch, std::abs(mean - slope));
    max_expansion = std::max(max_expansion, expansion);
    worst = std::max({worst, (hi - lo) / spread_tol, std::abs(mean - slope) / slope_tol});
    r.diagnostics.add_row({static_cast<double>(x), hi - lo, mean, slope, expansion});
  }
  r.name = "metric_brenier";
  r.anchor = "transport distance is a function of the source point";
  r.measured_slack = worst;
  r.tolerance = 1.0;
  r.finalize();
  r.set("max_spread", max_spread);
  r.set("max_slope_mismatch", max_mismatch);
  r.set("max_expansion", max_expansion);
  r.set("spread_allowance", "h (spread_factor + expansion)");
  r.set("slope_allowance", "h (slope_factor + (1 + expansion) / 2)");
  r.set("mode", "diagnostic");
  r.set("slack_units", "max per-point measured/allowance ratio");
  return r;
}

std::string interpolation_to_csv(const GeodesicPlan &plan, Index size)
{
  DiagnosticTable t;
  t.columns = {"t", "point_index", "mass"};
  for (Index k = 0; k <= plan.steps; ++k)
  {
    const Vector mu = plan.marginal(k, size);
    for (Index i = 0; i < size; ++i)
      if (mu[i] > 0.0)
        t.add_row({plan.time(k), static_cast<double>(i), mu[i]});
  }
  return t.to_csv();
}

} // namespace ricci
