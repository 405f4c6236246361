#include "ricci/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>

namespace ricci
{

void require_probability(const Vector &v, const std::string &what, double tol)
{
  for (Index i = 0; i < v.size(); ++i)
    if (!(v[i] >= 0.0) || !std::isfinite(v[i]))
      throw Error(what + " has a negative or non-finite entry at index " + std::to_string(i));
  const double s = ordered_sum(v);
  if (std::abs(s - 1.0) > tol)
    throw Error(what + " has total mass " + format_double(s) + ", expected 1");
}

namespace
{

std::vector<Index> positive_indices(const Vector &v)
{
  std::vector<Index> s;
  for (Index i = 0; i < v.size(); ++i)
    if (v[i] > 0.0)
      s.push_back(i);
  return s;
}

// Transportation simplex on the p x q instance restricted to the marginal supports.
class TransportSimplex
{
public:
  TransportSimplex(Matrix cost, Vector a, Vector b)
      : c_(std::move(cost)), a_(std::move(a)), b_(std::move(b)), p_(c_.rows()), q_(c_.cols()),
        x_(Matrix::Zero(p_, q_)), basic_(p_ * q_, 0), u_(p_), v_(q_)
  {
    scale_ = std::max(1.0, c_.cwiseAbs().maxCoeff());
    tol_ = 1e-12 * scale_;
  }

  void run()
  {
    north_west_corner();
    const long max_pivots = 50L * static_cast<long>(p_ * q_) + 1000L;
    long degenerate_run = 0;
    for (;;)
    {
      compute_duals();
      const bool bland = degenerate_run > static_cast<long>(p_ + q_);
      Index ei = -1, ej = -1;
      if (!price(bland, ei, ej))
        break;
      if (pivots_ >= max_pivots)
        throw Error("transportation simplex exceeded its pivot budget");
      const double theta = pivot(ei, ej);
      ++pivots_;
      if (theta == 0.0)
      {
        ++degenerate_;
        ++degenerate_run;
      }
      else
      {
        degenerate_run = 0;
      }
    }
    alternative_ = false;
    for (Index i = 0; i < p_ && !alternative_; ++i)
      for (Index j = 0; j < q_; ++j)
        if (!basic_[cell(i, j)] && c_(i, j) - u_[i] - v_[j] <= tol_)
        {
          alternative_ = true;
          break;
        }
  }

  const Matrix &plan() const { return x_; }
  const Vector &u() const { return u_; }
  const Vector &v() const { return v_; }
  bool alternative() const { return alternative_; }
  long pivots() const { return pivots_; }
  long degenerate() const { return degenerate_; }

private:
  Index cell(Index i, Index j) const { return i * q_ + j; }

  void north_west_corner()
  {
    Vector ra = a_;
    Vector rb = b_;
    Index i = 0, j = 0;
    for (;;)
    {
      const double x = std::min(ra[i], rb[j]);
      x_(i, j) = x;
      basic_[cell(i, j)] = 1;
      ra[i] -= x;
      rb[j] -= x;
      if (i == p_ - 1 && j == q_ - 1)
        break;
      if (j == q_ - 1 || (i < p_ - 1 && ra[i] <= rb[j]))
        ++i;
      else
        ++j;
    }
  }

  void build_adjacency()
  {
    rows_.assign(p_, {});
    cols_.assign(q_, {});
    for (Index i = 0; i < p_; ++i)
      for (Index j = 0; j < q_; ++j)
        if (basic_[cell(i, j)])
        {
          rows_[i].push_back(j);
          cols_[j].push_back(i);
        }
  }

  void compute_duals()
  {
    build_adjacency();
    std::vector<char> seen_row(p_, 0), seen_col(q_, 0);
    std::deque<Index> queue; // nodes: rows as i, columns as p + j
    u_[0] = 0.0;
    seen_row[0] = 1;
    queue.push_back(0);
    while (!queue.empty())
    {
      const Index node = queue.front();
      queue.pop_front();
      if (node < p_)
      {
        for (Index j : rows_[node])
          if (!seen_col[j])
          {
            v_[j] = c_(node, j) - u_[node];
            seen_col[j] = 1;
            queue.push_back(p_ + j);
          }
      }
      else
      {
        const Index j = node - p_;
        for (Index i : cols_[j])
          if (!seen_row[i])
          {
            u_[i] = c_(i, j) - v_[j];
            seen_row[i] = 1;
            queue.push_back(i);
          }
      }
    }
    for (Index i = 0; i < p_; ++i)
      if (!seen_row[i])
        throw Error("transportation basis lost its spanning-tree structure");
    for (Index j = 0; j < q_; ++j)
      if (!seen_col[j])
        throw Error("transportation basis lost its spanning-tree structure");
  }

  bool price(bool bland, Index &ei, Index &ej) const
  {
    double best = -tol_;
    for (Index i = 0; i < p_; ++i)
    {
      for (Index j = 0; j < q_; ++j)
      {
        if (basic_[cell(i, j)])
          continue;
        const double r = c_(i, j) - u_[i] - v_[j];
        if (r < best)
        {
          ei = i;
          ej = j;
          if (bland)
            return true;
          best = r;
        }
      }
    }
    return ei >= 0;
  }

  // Returns the step length.
  double pivot(Index ei, Index ej)
  {
    // Tree path from row ei to column ej.
    const Index nodes = p_ + q_;
    std::vector<Index> parent(nodes, -2);
    std::deque<Index> queue{ei};
    parent[ei] = -1;
    const Index goal = p_ + ej;
    while (!queue.empty() && parent[goal] == -2)
    {
      const Index node = queue.front();
      queue.pop_front();
      if (node < p_)
      {
        for (Index j : rows_[node])
          if (parent[p_ + j] == -2)
          {
            parent[p_ + j] = node;
            queue.push_back(p_ + j);
          }
      }
      else
      {
        for (Index i : cols_[node - p_])
          if (parent[i] == -2)
          {
            parent[i] = node;
            queue.push_back(i);
          }
      }
    }
    std::vector<Index> path; // goal ... ei
    for (Index node = goal; node != -1; node = parent[node])
      path.push_back(node);
    std::reverse(path.begin(), path.end());

    std::vector<std::pair<Index, Index>> edges; // from ei outwards
    for (std::size_t k = 0; k + 1 < path.size(); ++k)
    {
      const Index s = path[k], t = path[k + 1];
      if (s < p_)
        edges.emplace_back(s, t - p_);
      else
        edges.emplace_back(t, s - p_);
    }

    double theta = kInf;
    for (std::size_t k = 0; k < edges.size(); k += 2)
      theta = std::min(theta, x_(edges[k].first, edges[k].second));
    Index leave = -1;
    for (std::size_t k = 0; k < edges.size(); k += 2)
    {
      const auto [i, j] = edges[k];
      if (x_(i, j) == theta && (leave < 0 || cell(i, j) < leave))
        leave = cell(i, j);
    }

    x_(ei, ej) = theta;
    for (std::size_t k = 0; k < edges.size(); ++k)
    {
      const auto [i, j] = edges[k];
      if (k % 2 == 0)
        x_(i, j) -= theta;
      else
        x_(i, j) += theta;
    }
    x_(leave / q_, leave % q_) = 0.0;
    basic_[leave] = 0;
    basic_[cell(ei, ej)] = 1;
    return theta;
  }

  Matrix c_;
  Vector a_, b_;
  Index p_, q_;
  Matrix x_;
  std::vector<char> basic_;
  Vector u_, v_;
  std::vector<std::vector<Index>> rows_, cols_;
  double scale_ = 1.0;
  double tol_ = 0.0;
  bool alternative_ = false;
  long pivots_ = 0;
  long degenerate_ = 0;
};

void require_in_support(const MetricMeasureSpace &space, const Vector &mu, const std::string &what)
{
  if (mu.size() != space.size())
    throw Error(what + " size does not match the space");
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0 && !(space.mass(i) > 0.0))
      throw Error(what + " charges point " + std::to_string(i) + " outside the support of m");
}

Matrix half_squared(const MetricMeasureSpace &space) { return 0.5 * space.distances().cwiseAbs2(); }

double plan_cost(const Matrix &gamma, const Matrix &cost)
{
  double s = 0.0;
  for (Index j = 0; j < gamma.cols(); ++j)
    for (Index i = 0; i < gamma.rows(); ++i)
      if (gamma(i, j) != 0.0)
        s += gamma(i, j) * cost(i, j);
  return s;
}

double log_sum_exp(const double *values, Index n, Index stride)
{
  double mx = -kInf;
  for (Index k = 0; k < n; ++k)
    mx = std::max(mx, values[k * stride]);
  if (mx == -kInf)
    return -kInf;
  double s = 0.0;
  for (Index k = 0; k < n; ++k)
    s += std::exp(values[k * stride] - mx);
  return mx + std::log(s);
}

} // namespace

LpSolution solve_transport_lp(const Matrix &cost, const Vector &mu, const Vector &nu)
{
  if (cost.rows() != mu.size() || cost.cols() != nu.size())
    throw Error("cost table shape does not match the marginals");
  if (std::abs(ordered_sum(mu) - ordered_sum(nu)) > 1e-12)
    throw Error("marginal masses differ by " + format_double(std::abs(ordered_sum(mu) - ordered_sum(nu))));
  for (Index i = 0; i < mu.size(); ++i)
    if (!(mu[i] >= 0.0))
      throw Error("source marginal has a negative entry");
  for (Index j = 0; j < nu.size(); ++j)
    if (!(nu[j] >= 0.0))
      throw Error("target marginal has a negative entry");

  LpSolution out;
  out.source_support = positive_indices(mu);
  out.target_support = positive_indices(nu);
  if (out.source_support.empty() || out.target_support.empty())
    throw Error("transport marginals must have positive mass");
  const Index p = static_cast<Index>(out.source_support.size());
  const Index q = static_cast<Index>(out.target_support.size());
  Matrix c(p, q);
  Vector a(p), b(q);
  for (Index i = 0; i < p; ++i)
  {
    a[i] = mu[out.source_support[i]];
    for (Index j = 0; j < q; ++j)
      c(i, j) = cost(out.source_support[i], out.target_support[j]);
  }
  for (Index j = 0; j < q; ++j)
    b[j] = nu[out.target_support[j]];

  TransportSimplex simplex(c, a, b);
  simplex.run();

  out.gamma = Matrix::Zero(mu.size(), nu.size());
  out.u = Vector::Zero(mu.size());
  out.v = Vector::Zero(nu.size());
  for (Index i = 0; i < p; ++i)
  {
    out.u[out.source_support[i]] = simplex.u()[i];
    for (Index j = 0; j < q; ++j)
      out.gamma(out.source_support[i], out.target_support[j]) = simplex.plan()(i, j);
  }
  for (Index j = 0; j < q; ++j)
    out.v[out.target_support[j]] = simplex.v()[j];
  out.objective = plan_cost(out.gamma, cost);
  out.dual_objective = ordered_dot(mu, out.u) + ordered_dot(nu, out.v);
  out.alternative_optima = simplex.alternative();
  out.pivots = simplex.pivots();
  out.degenerate_pivots = simplex.degenerate();
  return out;
}

Vector c_transform(const MetricMeasureSpace &space, const Vector &psi)
{
  if (psi.size() != space.size())
    throw Error("c-transform input size does not match the space");
  const Index n = space.size();
  Vector out(n);
  for (Index x = 0; x < n; ++x)
  {
    double best = kInf;
    for (Index y = 0; y < n; ++y)
      best = std::min(best, 0.5 * space.d(x, y) * space.d(x, y) - psi[y]);
    out[x] = best;
  }
  return out;
}

ExactTransport solve_w2_exact(const MetricMeasureSpace &space, const Vector &mu, const Vector &nu)
{
  require_in_support(space, mu, "source measure");
  require_in_support(space, nu, "target measure");
  const Matrix c = half_squared(space);
  LpSolution lp = solve_transport_lp(c, mu, nu);

  ExactTransport out;
  out.plan.gamma = std::move(lp.gamma);
  out.plan.source = mu;
  out.plan.target = nu;
  out.plan.cost = 2.0 * plan_cost(out.plan.gamma, c);
  out.w2 = std::sqrt(std::max(0.0, out.plan.cost));
  out.alternative_optima = lp.alternative_optima;

  // Extend the basis dual off the support by c-transforming against supp nu.
  const Index n = space.size();
  Vector phi(n);
  for (Index x = 0; x < n; ++x)
  {
    double best = kInf;
    for (Index y : lp.target_support)
      best = std::min(best, c(x, y) - lp.v[y]);
    phi[x] = best;
  }
  const double anchor = phi[lp.source_support.front()];
  phi.array() -= anchor;
  Vector phi_c = c_transform(space, phi);
  out.potentials = {std::move(phi), std::move(phi_c)};
  out.duality_gap =
      0.5 * out.plan.cost - (ordered_dot(mu, out.potentials.phi) + ordered_dot(nu, out.potentials.phi_c));
  return out;
}

double w1(const MetricMeasureSpace &space, const Vector &mu, const Vector &nu)
{
  require_in_support(space, mu, "source measure");
  require_in_support(space, nu, "target measure");
  return solve_transport_lp(space.distances(), mu, nu).objective;
}

EntropicTransport solve_entropic(const MetricMeasureSpace &space, const Vector &mu, const Vector &nu, double eps,
                                 const EntropicOptions &options)
{
  if (!(eps > 0.0))
    throw Error("entropic regularization must be positive");
  require_in_support(space, mu, "source measure");
  require_in_support(space, nu, "target measure");
  if (std::abs(ordered_sum(mu) - ordered_sum(nu)) > 1e-12)
    throw Error("marginal masses differ");
  const std::vector<Index> S = positive_indices(mu);
  const std::vector<Index> T = positive_indices(nu);
  const Index p = static_cast<Index>(S.size());
  const Index q = static_cast<Index>(T.size());
  Matrix C(p, q);
  Vector a(p), b(q), loga(p), logb(q);
  for (Index i = 0; i < p; ++i)
  {
    a[i] = mu[S[i]];
    loga[i] = std::log(a[i]);
    for (Index j = 0; j < q; ++j)
      C(i, j) = space.d(S[i], T[j]) * space.d(S[i], T[j]);
  }
  for (Index j = 0; j < q; ++j)
  {
    b[j] = nu[T[j]];
    logb[j] = std::log(b[j]);
  }

  Vector f = Vector::Zero(p), g = Vector::Zero(q);
  Matrix work(p, q);
  double level = std::max(eps, C.maxCoeff());
  EntropicTransport out;
  auto row_residual = [&](double e) {
    double r = 0.0;
    for (Index i = 0; i < p; ++i)
    {
      double s = 0.0;
      for (Index j = 0; j < q; ++j)
        s += std::exp((f[i] + g[j] - C(i, j)) / e);
      r = std::max(r, std::abs(s - a[i]));
    }
    return r;
  };
  for (;;)
  {
    const bool final_stage = level <= eps;
    const double stage_tol = final_stage ? options.tolerance : std::max(options.tolerance, 1e-4);
    for (;;)
    {
      for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < q; ++j)
          work(i, j) = (g[j] - C(i, j)) / level;
      for (Index i = 0; i < p; ++i)
        f[i] = level * (loga[i] - log_sum_exp(&work(i, 0), q, p));
      for (Index j = 0; j < q; ++j)
        for (Index i = 0; i < p; ++i)
          work(i, j) = (f[i] - C(i, j)) / level;
      for (Index j = 0; j < q; ++j)
        g[j] = level * (logb[j] - log_sum_exp(&work(0, j), p, 1));
      ++out.iterations;
      out.residual = row_residual(level);
      if (out.residual <= stage_tol || out.iterations >= options.max_iterations)
        break;
    }
    if (final_stage || out.iterations >= options.max_iterations)
      break;
    level = std::max(eps, 0.5 * level);
  }
  out.converged = out.residual <= options.tolerance && level <= eps;

  Matrix P(p, q);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < q; ++j)
      P(i, j) = std::exp((f[i] + g[j] - C(i, j)) / level);
  // Round onto the exact transport polytope.
  for (Index i = 0; i < p; ++i)
  {
    const double r = P.row(i).sum();
    if (r > a[i])
      P.row(i) *= a[i] / r;
  }
  for (Index j = 0; j < q; ++j)
  {
    const double s = P.col(j).sum();
    if (s > b[j])
      P.col(j) *= b[j] / s;
  }
  Vector er = a - P.rowwise().sum();
  Vector ec = b - P.colwise().sum().transpose();
  er = er.cwiseMax(0.0);
  ec = ec.cwiseMax(0.0);
  const double mass = er.sum();
  if (mass > 0.0)
    P += er * ec.transpose() / mass;

  out.plan.gamma = Matrix::Zero(mu.size(), nu.size());
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < q; ++j)
      out.plan.gamma(S[i], T[j]) = P(i, j);
  out.plan.source = mu;
  out.plan.target = nu;
  out.plan.cost = plan_cost(out.plan.gamma, space.distances().cwiseAbs2());
  return out;
}

CheckResult check_cyclical_monotonicity(const MetricMeasureSpace &space, const TransportPlan &plan, int maxlen,
                                        double tol)
{
  if (maxlen < 2 || maxlen > 4)
    throw Error("cycle length must lie in [2, 4]");
  std::vector<std::pair<Index, Index>> cells;
  for (Index i = 0; i < plan.gamma.rows(); ++i)
    for (Index j = 0; j < plan.gamma.cols(); ++j)
      if (plan.gamma(i, j) > 0.0)
        cells.emplace_back(i, j);
  const double work = std::pow(static_cast<double>(cells.size()), maxlen);
  if (work > 5e8)
    throw Error("cyclical monotonicity scan too large for " + std::to_string(cells.size()) + " support cells");

  auto c = [&](Index x, Index y) { return 0.5 * space.d(x, y) * space.d(x, y); };
  double worst = 0.0;
  std::vector<std::size_t> best_cycle;
  std::vector<std::size_t> cycle;
  std::function<void(int)> extend = [&](int k) {
    if (k >= 2)
    {
      double diag = 0.0, shifted = 0.0;
      for (int r = 0; r < k; ++r)
      {
        const auto &cur = cells[cycle[r]];
        const auto &next = cells[cycle[(r + 1) % k]];
        diag += c(cur.first, cur.second);
        shifted += c(cur.first, next.second);
      }
      if (diag - shifted > worst)
      {
        worst = diag - shifted;
        best_cycle = cycle;
      }
    }
    if (k == maxlen)
      return;
    // the first cell is the smallest, which fixes the rotation of each cycle
    for (std::size_t s = cycle.front() + 1; s < cells.size(); ++s)
    {
      if (std::find(cycle.begin(), cycle.end(), s) != cycle.end())
        continue;
      cycle.push_back(s);
      extend(k + 1);
      cycle.pop_back();
    }
  };
  for (std::size_t s = 0; s < cells.size(); ++s)
  {
    cycle.assign(1, s);
    extend(1);
  }

  CheckResult r = CheckResult::make("cyclical_monotonicity", "c-cyclical monotonicity of the plan support", worst, tol);
  r.set("max_cycle_length", maxlen);
  r.set("support_cells", static_cast<long long>(cells.size()));
  if (!best_cycle.empty())
  {
    std::ostringstream s;
    for (std::size_t k = 0; k < best_cycle.size(); ++k)
      s << (k ? " " : "") << "(" << cells[best_cycle[k]].first << "," << cells[best_cycle[k]].second << ")";
    r.set("worst_cycle", s.str());
  }
  return r;
}

Vector push_forward_plan(const TransportPlan &plan, const Vector &mu_tilde)
{
  const Vector first = plan.source.size() ? plan.source : Vector(plan.gamma.rowwise().sum());
  if (mu_tilde.size() != first.size())
    throw Error("measure size does not match the plan");
  Vector out = Vector::Zero(plan.gamma.cols());
  for (Index x = 0; x < first.size(); ++x)
  {
    if (mu_tilde[x] < 0.0)
      throw Error("pushed measure has a negative entry at " + std::to_string(x));
    if (mu_tilde[x] == 0.0)
      continue;
    if (!(first[x] > 0.0))
      throw Error("measure is not absolutely continuous with respect to the plan's first marginal at point " +
                  std::to_string(x));
    const double rho = mu_tilde[x] / first[x];
    for (Index y = 0; y < out.size(); ++y)
      out[y] += rho * plan.gamma(x, y);
  }
  return out;
}

std::string plan_to_csv(const TransportPlan &plan)
{
  DiagnosticTable t;
  t.columns = {"x_index", "y_index", "mass"};
  for (Index i = 0; i < plan.gamma.rows(); ++i)
    for (Index j = 0; j < plan.gamma.cols(); ++j)
      if (plan.gamma(i, j) > 0.0)
        t.add_row({static_cast<double>(i), static_cast<double>(j), plan.gamma(i, j)});
  return t.to_csv();
}

nlohmann::json plan_to_json(const TransportPlan &plan)
{
  nlohmann::json cells = nlohmann::json::array();
  for (Index i = 0; i < plan.gamma.rows(); ++i)
    for (Index j = 0; j < plan.gamma.cols(); ++j)
      if (plan.gamma(i, j) > 0.0)
        cells.push_back({i, j, plan.gamma(i, j)});
  nlohmann::json j;
  j["version"] = kSchemaVersion;
  j["rows"] = plan.gamma.rows();
  j["cols"] = plan.gamma.cols();
  j["cells"] = std::move(cells);
  j["cost"] = plan.cost;
  return j;
}

nlohmann::json potentials_to_json(const DualPotentials &potentials)
{
  nlohmann::json j;
  j["phi"] = std::vector<double>(potentials.phi.data(), potentials.phi.data() + potentials.phi.size());
  j["phi_c"] = std::vector<double>(potentials.phi_c.data(), potentials.phi_c.data() + potentials.phi_c.size());
  return j;
}

} // namespace ricci
