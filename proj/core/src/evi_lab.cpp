#include "ricci/evi_lab.hpp"

#include <algorithm>
#include <cmath>

#include "ricci/circle_transport.hpp"
#include "ricci/transport.hpp"

namespace ricci
{

double ik(double K, double t)
{
  if (!(t >= 0.0))
    throw Error("I_K(t) needs t >= 0");
  if (std::abs(K) < 1e-14)
    return t + 0.5 * K * t * t + K * K * t * t * t / 6.0;
  return std::expm1(K * t) / K;
}

std::string FlowTrajectory::to_csv() const
{
  DiagnosticTable t;
  t.columns = {"t", "point_index", "density"};
  for (std::size_t k = 0; k < times.size(); ++k)
    for (Index i = 0; i < densities[k].size(); ++i)
      t.add_row({times[k], static_cast<double>(i), densities[k][i]});
  return t.to_csv();
}

FlowTrajectory heat_flow(const HeatOperator &ho, const Vector &rho0, const std::vector<double> &times)
{
  FlowTrajectory out;
  out.provenance = "heat";
  double last = -kInf;
  for (double t : times)
  {
    if (!(t > last))
      throw Error("flow times must be strictly increasing");
    last = t;
    out.times.push_back(t);
    out.densities.push_back(ho.apply(rho0, t));
  }
  return out;
}

namespace
{

void require_increasing(const std::vector<double> &times)
{
  if (times.empty())
    throw Error("time grid is empty");
  for (std::size_t k = 0; k < times.size(); ++k)
  {
    if (!(times[k] >= 0.0))
      throw Error("times must be nonnegative");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw Error("times must be strictly increasing");
  }
}

double w2sq(const MetricMeasureSpace &s, const Vector &mu, const Vector &nu)
{
  return solve_w2_exact(s, mu, nu).plan.cost;
}

// Flowed measure at time t from an initial density.
Vector flowed_measure(const HeatOperator &ho, const Vector &rho0, double t)
{
  Vector mu = ho.apply(rho0, t).cwiseProduct(ho.structure().measure());
  // Heat-flow measures are nonnegative up to rounding; clip and renormalize for the LP.
  mu = mu.cwiseMax(0.0);
  return mu / ordered_sum(mu);
}

double l1_norm(const Vector &f, const Vector &m) { return ordered_dot(m, f.cwiseAbs()); }

// r log r - r + 1 written as a function of d = r - 1, with a series near d = 0 where the closed
// form cancels.
double entropy_kernel(double d)
{
  if (d <= -1.0)
    return 1.0;
  if (std::abs(d) > 1e-2)
    return (1.0 + d) * std::log1p(d) - d;
  double sum = 0.0, power = d;
  for (int k = 2; k < 12; ++k)
  {
    power *= (k == 2 ? d : -d);
    sum += power / (k * (k - 1));
  }
  return sum;
}

} // namespace

CheckResult evi_check(const GridSpace &grid, const HeatOperator &ho, const Vector &mu, const Vector &nu, double K,
                      const std::vector<double> &times, double c_tol)
{
  require_increasing(times);
  const MetricMeasureSpace &s = grid.space();
  const Vector &m = s.measure();
  require_probability(mu, "initial measure");
  require_probability(nu, "reference measure");
  const double ent_nu = relative_entropy(nu, m);
  if (!std::isfinite(ent_nu) || !std::isfinite(relative_entropy(mu, m)))
    throw Error("EVI check needs measures of finite entropy");
  const Vector rho0 = density_of(mu, m);
  const DirichletStructure &ds = ho.structure();

  const std::size_t nt = times.size();
  std::vector<double> w2(nt), ent(nt);
  for (std::size_t k = 0; k < nt; ++k)
  {
    const Vector mut = flowed_measure(ho, rho0, times[k]);
    w2[k] = w2sq(s, mut, nu);
    ent[k] = relative_entropy(mut, m);
  }

  double integral_slack = 0.0;
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = i + 1; j < nt; ++j)
    {
      const double dt = times[j] - times[i];
      const double val = 0.5 * std::exp(K * dt) * w2[j] - 0.5 * w2[i] - ik(K, dt) * (ent_nu - ent[j]);
      integral_slack = std::max(integral_slack, val);
    }

  CheckResult r;
  r.diagnostics.columns = {"t", "w2", "entropy", "fisher", "slack"};
  double differential_slack = 0.0;
  double fd_error = 0.0;
  for (std::size_t k = 0; k < nt; ++k)
  {
    const double t = times[k];
    double slack = 0.0;
    if (t > 0.0)
    {
      const double d = 1e-4 * t;
      auto half_w2 = [&](double tt) { return 0.5 * w2sq(s, flowed_measure(ho, rho0, tt), nu); };
      const double d1 = (half_w2(t + d) - half_w2(t - d)) / (2.0 * d);
      const double d2 = (half_w2(t + d / 2) - half_w2(t - d / 2)) / d;
      const double deriv = (4.0 * d2 - d1) / 3.0;
      fd_error = std::max(fd_error, std::abs(d2 - d1));
      slack = deriv + 0.5 * K * w2[k] + ent[k] - ent_nu;
      differential_slack = std::max(differential_slack, slack);
    }
    const Vector rhot = ho.apply(rho0, t).cwiseMax(0.0);
    r.diagnostics.add_row({t, std::sqrt(w2[k]), ent[k], fisher_information(ds, rhot), slack});
  }

  const double budget = cd_budget(grid, mu, nu, c_tol) + fd_error + 1e-10;
  r.name = "evi";
  r.anchor = "evolution variational inequality for the heat flow";
  r.measured_slack = std::max(integral_slack, differential_slack);
  r.tolerance = budget;
  r.finalize();
  r.set("K", K);
  r.set("h", grid.h());
  r.set("C_tol", c_tol);
  r.set("integral_slack", integral_slack);
  r.set("differential_slack", differential_slack);
  r.set("finite_difference_error", fd_error);
  r.set("time_min", times.front());
  r.set("time_max", times.back());
  return r;
}

CheckResult contraction_check(const GridSpace &grid, const HeatOperator &ho, const Vector &mu, const Vector &nu,
                              double K, const std::vector<double> &times, double c_tol)
{
  require_increasing(times);
  const MetricMeasureSpace &s = grid.space();
  const Vector &m = s.measure();
  require_probability(mu, "first measure");
  require_probability(nu, "second measure");
  const Vector rmu = density_of(mu, m);
  const Vector rnu = density_of(nu, m);
  const double w2_0 = std::sqrt(w2sq(s, mu, nu));
  const double w1_0 = w1(s, mu, nu);
  CheckResult r;
  r.diagnostics.columns = {"t", "w2", "w2_bound", "w1", "w1_bound"};
  double worst = 0.0;
  for (double t : times)
  {
    const Vector a = flowed_measure(ho, rmu, t);
    const Vector b = flowed_measure(ho, rnu, t);
    const double w2t = std::sqrt(w2sq(s, a, b));
    const double w1t = w1(s, a, b);
    const double decay = std::exp(-K * t);
    worst = std::max({worst, w2t - decay * w2_0, w1t - decay * w1_0});
    r.diagnostics.add_row({t, w2t, decay * w2_0, w1t, decay * w1_0});
  }
  // Grid distances are within h of the model distances, hence 2h for a transferred bound.
  r.name = "contraction";
  r.anchor = "exponential contraction of W2 and W1 along the heat flow";
  r.measured_slack = worst;
  r.tolerance = 2.0 * grid.h() + 1e-10;
  r.finalize();
  r.set("K", K);
  r.set("h", grid.h());
  r.set("C_tol", c_tol);
  r.set("initial_w2", w2_0);
  r.set("initial_w1", w1_0);
  return r;
}

CheckResult bakry_emery_check(const HeatOperator &ho, const Vector &f, double K, const std::vector<double> &times,
                              double tol)
{
  const DirichletStructure &ds = ho.structure();
  const Vector gf = ds.gamma(f);
  CheckResult r;
  r.diagnostics.columns = {"t", "max_defect"};
  double worst = 0.0;
  for (double t : times)
  {
    const Vector lhs = ds.gamma(ho.apply(f, t));
    const Vector rhs = std::exp(-2.0 * K * t) * ho.apply(gf, t);
    const double defect = (lhs - rhs).maxCoeff();
    worst = std::max(worst, defect);
    r.diagnostics.add_row({t, defect});
  }
  r.name = "bakry_emery";
  r.anchor = "Bakry-Emery gradient estimate for the heat semigroup";
  r.measured_slack = worst;
  r.tolerance = tol;
  r.finalize();
  r.set("K", K);
  return r;
}

CheckResult log_sobolev_check(const HeatOperator &ho, double K, int trials, std::uint64_t seed, double tol)
{
  if (!(K > 0.0))
    throw Error("log-Sobolev check needs K > 0");
  const DirichletStructure &ds = ho.structure();
  const Vector &m = ds.measure();
  const Index n = ds.size();
  CounterRng rng(seed, 0x6c7369ULL);

  std::vector<Vector> samples;
  for (int k = 0; k < trials; ++k)
  {
    Vector f(n);
    if (k % 2 == 0)
    {
      for (Index i = 0; i < n; ++i)
        f[i] = rng.normal();
    }
    else
    {
      // Perturbations of the constant probe the linearized regime where the constant is attained.
      const double eps = std::pow(10.0, -1.0 - 3.0 * rng.uniform());
      for (Index i = 0; i < n; ++i)
        f[i] = 1.0 + eps * rng.normal();
    }
    samples.push_back(std::move(f));
  }
  double gap = kInf;
  if (ho.mode() == HeatMode::spectral && n > 1)
  {
    gap = ho.spectral_gap();
    const Vector phi1 = ho.eigenvectors().col(1).cwiseQuotient(m.cwiseSqrt());
    for (double eps : {1e-2, 1e-3})
      samples.push_back(Vector::Ones(n) + eps * phi1);
  }

  double worst = -kInf;
  double best_ratio = kInf;
  for (Vector f : samples)
  {
    f /= std::sqrt(ordered_dot(m, f.cwiseProduct(f)));
    // With the mean of f^2 equal to one, Ent(f^2) is the mean of r log r - r + 1 at r = f^2.
    double ent = 0.0;
    for (Index i = 0; i < n; ++i)
      ent += m[i] * entropy_kernel(f[i] * f[i] - 1.0);
    const double energy = ordered_dot(m, ds.gamma(f));
    worst = std::max(worst, ent - (2.0 / K) * energy);
    if (ent > 1e-14)
      best_ratio = std::min(best_ratio, 2.0 * energy / ent);
  }
  CheckResult r = CheckResult::make("log_sobolev", "logarithmic Sobolev inequality", std::max(0.0, worst), tol);
  r.set("K", K);
  r.set("samples", static_cast<long long>(samples.size()));
  r.set("worst_margin", worst);
  r.set("implied_best_constant", std::min(best_ratio, gap));
  r.set("sampled_best_ratio", best_ratio);
  r.set("spectral_gap", gap);
  return r;
}

CheckResult dissipation_check(const HeatOperator &ho, const Vector &rho0, const std::vector<double> &times,
                              double tol)
{
  require_increasing(times);
  if (rho0.minCoeff() <= 0.0)
    throw Error("dissipation check needs a density bounded away from zero");
  const DirichletStructure &ds = ho.structure();
  const Vector &m = ds.measure();
  auto ent = [&](double t) { return density_entropy(ho.apply(rho0, t), m); };
  CheckResult r;
  r.diagnostics.columns = {"t", "dissipation_fd", "gamma_rho_log_rho", "fisher"};
  double worst = 0.0;
  double defect = 0.0;
  for (double t : times)
  {
    if (!(t > 0.0))
      throw Error("dissipation times must be positive");
    const double d = 1e-4 * t;
    const double d1 = (ent(t + d) - ent(t - d)) / (2.0 * d);
    const double d2 = (ent(t + d / 2) - ent(t - d / 2)) / d;
    const double fd = -(4.0 * d2 - d1) / 3.0;
    const Vector rho = ho.apply(rho0, t);
    const Vector logr = rho.array().log();
    const double identity = ordered_dot(m, ds.gamma(rho, logr));
    const double fisher = fisher_information(ds, rho);
    worst = std::max(worst, std::abs(fd - identity));
    defect = std::max(defect, identity - fisher);
    r.diagnostics.add_row({t, fd, identity, fisher});
  }
  r.name = "dissipation";
  r.anchor = "entropy dissipation along the heat flow";
  r.measured_slack = worst;
  r.tolerance = tol;
  r.finalize();
  r.set("fisher_defect", defect);
  r.set("fisher_note", "sum m Gamma(rho, log rho) - 4 C(sqrt rho), a discreteness defect");
  return r;
}

// ---------------------------------------------------------------------------
// JKO

namespace
{

struct JkoObjective
{
  const GridSpace &grid;
  const Vector &mu;
  double tau;
  bool cell;
  double theta = 0.0;

  // Value and gradient with respect to target masses.
  double eval(const Vector &nu, Vector *grad)
  {
    const Vector &m = grid.space().measure();
    double w2 = 0.0;
    Vector pot;
    if (cell)
    {
      CellTransport ct = cell_transport(grid, mu, nu, grad != nullptr, theta);
      theta = ct.theta;
      w2 = ct.w2_squared;
      pot = std::move(ct.potential);
    }
    else
    {
      ExactTransport ot = solve_w2_exact(grid.space(), mu, nu);
      w2 = ot.plan.cost;
      pot = ot.potentials.phi_c;
    }
    double ent = 0.0;
    for (Index i = 0; i < nu.size(); ++i)
      if (nu[i] > 0.0)
        ent += nu[i] * std::log(nu[i] / m[i]);
    if (grad)
    {
      *grad = pot / tau;
      for (Index i = 0; i < nu.size(); ++i)
        (*grad)[i] += std::log(nu[i] / m[i]) + 1.0;
    }
    return w2 / (2.0 * tau) + ent;
  }
};

double kkt_residual(const Vector &nu, const Vector &grad)
{
  const double mean = ordered_dot(nu, grad);
  double r = 0.0;
  for (Index i = 0; i < nu.size(); ++i)
    if (nu[i] > 0.0)
      r = std::max(r, std::abs(grad[i] - mean));
  return r;
}

} // namespace

FlowTrajectory jko_flow(const GridSpace &grid, const Vector &rho0, double tau, Index steps, const JkoOptions &options,
                        std::vector<JkoStepInfo> *info)
{
  if (!(tau > 0.0))
    throw Error("JKO step must be positive");
  const Vector &m = grid.space().measure();
  Vector mu = rho0.cwiseProduct(m);
  require_probability(mu, "initial JKO measure", 1e-10);
  if (!std::isfinite(relative_entropy(mu, m)))
    throw Error("JKO needs an initial measure of finite entropy");
  const bool cell = options.use_cell_transport &&
                    (grid.model() == ModelKind::circle || grid.model() == ModelKind::interval);

  FlowTrajectory out;
  out.provenance = cell ? "jko (cell reconstruction transport)" : "jko (grid transport)";
  out.times.push_back(0.0);
  out.densities.push_back(rho0);
  double theta = 0.0;
  for (Index step = 0; step < steps; ++step)
  {
    JkoObjective obj{grid, mu, tau, cell, theta};
    // Start strictly inside the simplex.
    Vector nu = mu;
    if (nu.minCoeff() <= 0.0)
      nu = 0.999 * mu + 0.001 * m;
    Vector grad;
    double val = obj.eval(nu, &grad);
    double eta = 1.0 / (1.0 + grad.cwiseAbs().maxCoeff());
    JkoStepInfo si;
    si.kkt_residual = kkt_residual(nu, grad);
    while (si.kkt_residual > options.kkt_tolerance && si.iterations < options.max_inner_iterations)
    {
      ++si.iterations;
      const double mean = ordered_dot(nu, grad);
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt)
      {
        Vector trial = nu.array() * (-(eta * (grad.array() - mean))).exp();
        trial /= ordered_sum(trial);
        Vector tgrad;
        const double tval = obj.eval(trial, &tgrad);
        const double tres = kkt_residual(trial, tgrad);
        // Near the optimum the Armijo decrease drops below the rounding of the objective; a
        // smaller residual at a non-increasing objective (to rounding) is accepted instead.
        const bool armijo = tval <= val - 1e-4 * ordered_dot(grad, nu - trial);
        const bool flat = tres < si.kkt_residual && tval <= val + 1e-14 * (1.0 + std::abs(val));
        if (armijo || flat)
        {
          nu = std::move(trial);
          grad = std::move(tgrad);
          val = tval;
          si.kkt_residual = tres;
          accepted = true;
          break;
        }
        eta *= 0.5;
      }
      if (!accepted)
        break;
      eta *= 1.5;
    }
    theta = obj.theta;
    if (info)
      info->push_back(si);
    mu = nu;
    out.times.push_back(tau * static_cast<double>(step + 1));
    out.densities.push_back(density_of(mu, m));
  }
  return out;
}

CheckResult identification_check(const GridSpace &grid, const HeatOperator &ho, const Vector &rho0,
                                  const std::vector<double> &taus, double T, const JkoOptions &options)
{
  if (taus.size() < 2)
    throw Error("identification needs at least two step sizes");
  const Vector &m = grid.space().measure();
  const Vector target = ho.apply(rho0, T);
  std::vector<double> errors;
  double max_kkt = 0.0;
  int max_iterations = 0;
  CheckResult r;
  r.diagnostics.columns = {"tau", "steps", "l1_error", "max_kkt_residual"};
  for (double tau : taus)
  {
    const Index steps = static_cast<Index>(std::llround(T / tau));
    if (std::abs(static_cast<double>(steps) * tau - T) > 1e-9 * T)
      throw Error("final time must be a multiple of every step size");
    std::vector<JkoStepInfo> info;
    const FlowTrajectory flow = jko_flow(grid, rho0, tau, steps, options, &info);
    double kkt = 0.0;
    for (const auto &s : info)
    {
      kkt = std::max(kkt, s.kkt_residual);
      max_iterations = std::max(max_iterations, s.iterations);
    }
    max_kkt = std::max(max_kkt, kkt);
    errors.push_back(l1_norm(flow.densities.back() - target, m));
    r.diagnostics.add_row({tau, static_cast<double>(steps), errors.back(), kkt});
  }
  double worst = 0.0;
  for (std::size_t k = 1; k < errors.size(); ++k)
    worst = std::max(worst, errors[k] / errors[k - 1]);
  r.name = "jko_identification";
  r.anchor = "minimizing movements of the entropy converge to the heat flow";
  r.measured_slack = max_kkt <= options.kkt_tolerance ? worst : kInf;
  r.tolerance = 0.75;
  r.finalize();
  r.set("T", T);
  r.set("max_kkt_residual", max_kkt);
  r.set("max_inner_iterations", max_iterations);
  r.set("inner_converged", max_kkt <= options.kkt_tolerance);
  r.set("transport", options.use_cell_transport ? "cell reconstruction" : "grid");
  return r;
}

CheckResult derivative_w2_check(const GridSpace &grid, const HeatOperator &ho, const Vector &rho0,
                                const Vector &sigma, double t, const std::vector<double> &eps_list)
{
  if (rho0.minCoeff() <= 0.0)
    throw Error("derivative check needs a density bounded away from zero");
  if (!(t > 0.0))
    throw Error("derivative check needs t > 0");
  require_probability(sigma, "target measure");
  const MetricMeasureSpace &s = grid.space();
  const DirichletStructure &ds = ho.structure();
  const Vector &m = s.measure();
  const double d = 1e-3 * t;
  const Vector mut = flowed_measure(ho, rho0, t);
  const Vector rhot = ho.apply(rho0, t);
  const ExactTransport ot = solve_w2_exact(s, mut, sigma);
  const double lhs = (0.5 * ot.plan.cost - 0.5 * w2sq(s, flowed_measure(ho, rho0, t - d), sigma)) / d;
  const Vector &phi = ot.potentials.phi;
  // Opposite gauge: anchor at the last support point instead of the first.
  Index last = 0;
  for (Index i = 0; i < mut.size(); ++i)
    if (mut[i] > 0.0)
      last = i;
  const Vector phi_alt = phi.array() - phi[last];

  const double c0 = ds.cheeger(rhot);
  CheckResult r;
  r.diagnostics.columns = {"eps", "lhs", "rhs", "rhs_other_gauge"};
  double worst = -kInf;
  double gauge = 0.0;
  for (double eps : eps_list)
  {
    const double rhs = (ds.cheeger(rhot - eps * phi) - c0) / eps;
    const double rhs_alt = (ds.cheeger(rhot - eps * phi_alt) - c0) / eps;
    worst = std::max(worst, lhs - rhs);
    gauge = std::max(gauge, std::abs(rhs - rhs_alt));
    r.diagnostics.add_row({eps, lhs, rhs, rhs_alt});
  }
  const Vector lap2 = ds.laplacian(ds.laplacian(rhot));
  const double budget = d * std::abs(ordered_dot(m, phi.cwiseProduct(lap2))) + 1e-10 + gauge;
  r.name = "derivative_w2";
  r.anchor = "derivative of the squared Wasserstein distance along the heat flow";
  r.measured_slack = std::max(0.0, worst);
  r.tolerance = budget;
  r.finalize();
  r.set("t", t);
  r.set("difference_step", d);
  r.set("gauge_sensitivity", gauge);
  r.set("worst_margin", worst);
  return r;
}

CheckResult derivative_entropy_check(const GridSpace &grid, const DirichletStructure &ds, const Vector &rho0,
                                     const Vector &rho1, double K, const std::vector<double> &eps_list,
                                     double c_tol)
{
  if (rho0.minCoeff() <= 0.0)
    throw Error("derivative check needs a source density bounded away from zero");
  if (rho1.minCoeff() < 0.0)
    throw Error("target density must be nonnegative");
  const MetricMeasureSpace &s = grid.space();
  const Vector &m = s.measure();
  const Vector mu0 = rho0.cwiseProduct(m);
  const Vector mu1 = rho1.cwiseProduct(m);
  require_probability(mu0, "source measure", 1e-10);
  require_probability(mu1, "target measure", 1e-10);
  const ExactTransport ot = solve_w2_exact(s, mu0, mu1);
  const double lhs = relative_entropy(mu1, m) - relative_entropy(mu0, m) - 0.5 * K * ot.plan.cost;
  const Vector &phi = ot.potentials.phi;
  Index last = 0;
  for (Index i = 0; i < mu0.size(); ++i)
    if (mu0[i] > 0.0)
      last = i;
  const Vector phi_alt = phi.array() - phi[last];
  CheckResult r;
  r.diagnostics.columns = {"eps", "lhs", "rhs", "rhs_other_gauge"};
  double worst = -kInf;
  double gauge = 0.0;
  for (double eps : eps_list)
  {
    const double rhs = (ds.cheeger(phi) - ds.cheeger(phi + eps * rho0)) / eps;
    const double rhs_alt = (ds.cheeger(phi_alt) - ds.cheeger(phi_alt + eps * rho0)) / eps;
    worst = std::max(worst, rhs - lhs);
    gauge = std::max(gauge, std::abs(rhs - rhs_alt));
    r.diagnostics.add_row({eps, lhs, rhs, rhs_alt});
  }
  r.name = "derivative_entropy";
  r.anchor = "derivative of the entropy along a geodesic";
  r.measured_slack = std::max(0.0, worst);
  r.tolerance = cd_budget(grid, mu0, mu1, c_tol) + gauge + 1e-10;
  r.finalize();
  r.set("K", K);
  r.set("h", grid.h());
  r.set("gauge_sensitivity", gauge);
  r.set("worst_margin", worst);
  r.set("alternative_optima", ot.alternative_optima);
  return r;
}

CheckResult ultra_evi_check(const GridSpace &grid, const HeatOperator &ho, const Vector &mu, double K,
                            const std::vector<double> &times, double c_tol)
{
  require_increasing(times);
  const MetricMeasureSpace &s = grid.space();
  const Vector &m = s.measure();
  require_probability(mu, "initial measure");
  if (!std::isfinite(relative_entropy(mu, m)))
    throw Error("regularization check needs a measure of finite entropy");
  const DirichletStructure &ds = ho.structure();
  const Vector rho0 = density_of(mu, m);
  const double half_w2 = 0.5 * w2sq(s, m, mu);
  CheckResult r;
  r.diagnostics.columns = {"t", "entropy", "fisher", "lhs", "rhs"};
  double worst = -kInf;
  for (double t : times)
  {
    const Vector rho = ho.apply(rho0, t).cwiseMax(0.0);
    const double e = density_entropy(rho, m);
    const double f = fisher_information(ds, rho);
    const double i = ik(K, t);
    const double lhs = i * e + 0.5 * i * i * f;
    worst = std::max(worst, lhs - half_w2);
    r.diagnostics.add_row({t, e, f, lhs, half_w2});
  }
  r.name = "ultra_evi";
  r.anchor = "entropy and slope regularization estimate";
  r.measured_slack = std::max(0.0, worst);
  r.tolerance = cd_budget(grid, m, mu, c_tol) + 1e-10;
  r.finalize();
  r.set("K", K);
  r.set("h", grid.h());
  r.set("worst_margin", worst);
  r.set("slope_surrogate", "Fisher information 4 C(sqrt rho)");
  return r;
}

CheckResult lipschitz_regularization_check(const HeatOperator &ho, const Vector &f, double K,
                                           const std::vector<double> &times, double tol)
{
  const DirichletStructure &ds = ho.structure();
  const Vector f2 = f.cwiseProduct(f);
  CheckResult r;
  r.diagnostics.columns = {"t", "max_defect"};
  double worst = 0.0;
  for (double t : times)
  {
    const Vector lhs = 2.0 * ik(2.0 * K, t) * ds.gamma(ho.apply(f, t));
    const Vector rhs = ho.apply(f2, t);
    const double defect = (lhs - rhs).maxCoeff();
    worst = std::max(worst, defect);
    r.diagnostics.add_row({t, defect});
  }
  r.name = "lipschitz_regularization";
  r.anchor = "Lipschitz regularization of the heat semigroup";
  r.measured_slack = worst;
  r.tolerance = tol;
  r.finalize();
  r.set("K", K);
  return r;
}

} // namespace ricci
