#include "ricci/mmdist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "ricci/report.hpp"
#include "ricci/transport.hpp"

namespace ricci
{

namespace
{

void require_shapes(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Matrix &b)
{
  if (b.rows() != x.size() || b.cols() != y.size())
    throw Error("bridge table must be |X| x |Y|");
}

double weighted_cost(const Matrix &gamma, const Matrix &b) { return (gamma.array() * b.array().square()).sum(); }

} // namespace

double bridge_violation(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Matrix &b)
{
  require_shapes(x, y, b);
  const Index n = x.size(), m = y.size();
  double worst = std::max(0.0, -b.minCoeff());
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < n; ++k)
      {
        worst = std::max(worst, b(i, j) - x.d(i, k) - b(k, j));
        worst = std::max(worst, x.d(i, k) - b(i, j) - b(k, j));
      }
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index l = 0; l < m; ++l)
      {
        worst = std::max(worst, b(i, j) - y.d(j, l) - b(i, l));
        worst = std::max(worst, y.d(j, l) - b(i, j) - b(i, l));
      }
  return worst;
}

Matrix repair_bridge(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Matrix &b)
{
  require_shapes(x, y, b);
  const Index n = x.size(), m = y.size(), N = n + m;
  Matrix D(N, N);
  D.topLeftCorner(n, n) = x.distances();
  D.bottomRightCorner(m, m) = y.distances();
  D.topRightCorner(n, m) = b.cwiseMax(0.0);
  D.bottomLeftCorner(m, n) = b.cwiseMax(0.0).transpose();
  for (Index k = 0; k < N; ++k)
    for (Index i = 0; i < N; ++i)
    {
      const double dik = D(i, k);
      for (Index j = 0; j < N; ++j)
        D(i, j) = std::min(D(i, j), dik + D(k, j));
    }
  Matrix out = D.topRightCorner(n, m);
  // Symmetrize against rounding in the closure.
  out = 0.5 * (out + D.bottomLeftCorner(m, n).transpose());
  double shift = 0.0;
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i)
      for (Index k = i + 1; k < n; ++k)
        shift = std::max(shift, 0.5 * (x.d(i, k) - out(i, j) - out(k, j)));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index l = j + 1; l < m; ++l)
        shift = std::max(shift, 0.5 * (y.d(j, l) - out(i, j) - out(i, l)));
  out.array() += shift;
  return out;
}

Matrix seed_bridge(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Matrix &gamma)
{
  require_shapes(x, y, gamma);
  const Index n = x.size(), m = y.size();
  std::vector<std::pair<Index, Index>> rel;
  for (Index a = 0; a < n; ++a)
    for (Index c = 0; c < m; ++c)
      if (gamma(a, c) > 0.0)
        rel.push_back({a, c});
  if (rel.empty())
    throw Error("seed coupling is empty");
  // Half the distortion of the support makes the min-plus extension a pseudo-distance when
  // the support is a correspondence; the repair covers partial supports.
  double distortion = 0.0;
  for (const auto &[a, c] : rel)
    for (const auto &[a2, c2] : rel)
      distortion = std::max(distortion, std::abs(x.d(a, a2) - y.d(c, c2)));
  Matrix b = Matrix::Constant(n, m, kInf);
  for (const auto &[a, c] : rel)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j)
        b(i, j) = std::min(b(i, j), x.d(i, a) + y.d(c, j));
  b.array() += 0.5 * distortion;
  return repair_bridge(x, y, b);
}

namespace
{

struct QpResult
{
  Matrix b;
  double movement = 0.0;
  int sweeps = 0;
};

// min sum (gamma + floor) b^2 over the mixed-triangle polytope by Hildreth's dual coordinate
// ascent, which is Dykstra's cyclic projection specialised to half-spaces.
QpResult bridge_qp(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Matrix &gamma, double tol,
                   int max_sweeps)
{
  const Index n = x.size(), m = y.size();
  const double floor = 1e-3 / static_cast<double>(n * m);
  const Matrix inv_w = (gamma.array() + floor).inverse().matrix();
  Matrix b = Matrix::Zero(n, m);
  std::vector<double> lambda;
  lambda.reserve(static_cast<std::size_t>(n * n * m + n * m * m));
  QpResult out;
  // Constraint a.b <= c with a supported on cells p and q with coefficients sp and sq.
  auto visit = [&](std::size_t &k, double &move, Index pi, Index pj, double sp, Index qi, Index qj, double sq,
                   double c) {
    if (k == lambda.size())
      lambda.push_back(0.0);
    const double ip = inv_w(pi, pj), iq = inv_w(qi, qj);
    const double dot = sp * b(pi, pj) + sq * b(qi, qj);
    const double norm = sp * sp * ip + sq * sq * iq;
    const double next = std::max(0.0, lambda[k] + (dot - c) / norm);
    const double delta = next - lambda[k];
    if (delta != 0.0)
    {
      b(pi, pj) -= delta * sp * ip;
      b(qi, qj) -= delta * sq * iq;
      move = std::max(move, std::abs(delta) * std::max(std::abs(sp) * ip, std::abs(sq) * iq));
      lambda[k] = next;
    }
    ++k;
  };
  for (int sweep = 0; sweep < max_sweeps; ++sweep)
  {
    std::size_t k = 0;
    double move = 0.0;
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < n; ++i)
      {
        visit(k, move, i, j, -1.0, i, j, -1.0, 0.0);
        for (Index l = i + 1; l < n; ++l)
          visit(k, move, i, j, -1.0, l, j, -1.0, -x.d(i, l));
        for (Index l = 0; l < n; ++l)
          if (l != i)
            visit(k, move, i, j, 1.0, l, j, -1.0, x.d(i, l));
      }
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j)
      {
        for (Index l = j + 1; l < m; ++l)
          visit(k, move, i, j, -1.0, i, l, -1.0, -y.d(j, l));
        for (Index l = 0; l < m; ++l)
          if (l != j)
            visit(k, move, i, j, 1.0, i, l, -1.0, y.d(j, l));
      }
    out.sweeps = sweep + 1;
    out.movement = move;
    if (move < tol)
      break;
  }
  out.b = std::move(b);
  return out;
}

// North-west corner coupling along the given orders of X and Y.
Matrix ordered_coupling(const Vector &mx, const Vector &my, const std::vector<Index> &ox,
                        const std::vector<Index> &oy)
{
  Matrix g = Matrix::Zero(mx.size(), my.size());
  std::size_t a = 0, c = 0;
  double ra = mx[ox[0]], rc = my[oy[0]];
  while (a < ox.size() && c < oy.size())
  {
    const double q = std::min(ra, rc);
    g(ox[a], oy[c]) += q;
    ra -= q;
    rc -= q;
    // Advance the side that ran out; the last cell absorbs rounding residue.
    if (ra <= rc)
    {
      if (++a < ox.size())
        ra = mx[ox[a]];
    }
    else if (++c < oy.size())
      rc = my[oy[c]];
  }
  return g;
}

std::vector<Index> eccentricity_order(const MetricMeasureSpace &s)
{
  const Index n = s.size();
  Vector ecc(n);
  for (Index i = 0; i < n; ++i)
    ecc[i] = ordered_dot(s.measure(), s.distances().row(i).transpose().cwiseAbs2());
  std::vector<Index> o(n);
  std::iota(o.begin(), o.end(), Index{0});
  std::stable_sort(o.begin(), o.end(), [&](Index a, Index b) { return ecc[a] < ecc[b]; });
  return o;
}

std::vector<Index> shuffled(Index n, CounterRng &rng)
{
  std::vector<Index> o(n);
  std::iota(o.begin(), o.end(), Index{0});
  for (Index i = n - 1; i > 0; --i)
    std::swap(o[i], o[rng.below(static_cast<std::size_t>(i + 1))]);
  return o;
}

DistanceBound alternate(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Matrix &init,
                        const DistanceOptions &opt)
{
  DistanceBound out;
  out.coupling = init;
  out.bridge = seed_bridge(x, y, init);
  double cost = weighted_cost(out.coupling, out.bridge);
  out.history.push_back(cost);
  for (int round = 0; round < opt.rounds; ++round)
  {
    const double start = cost;
    const LpSolution lp = solve_transport_lp(out.bridge.cwiseAbs2(), x.measure(), y.measure());
    if (lp.objective <= cost)
    {
      out.coupling = lp.gamma;
      cost = weighted_cost(out.coupling, out.bridge);
    }
    out.history.push_back(cost);
    const QpResult qp = bridge_qp(x, y, out.coupling, opt.qp_tolerance, opt.qp_max_sweeps);
    out.max_qp_residual = std::max(out.max_qp_residual, qp.movement);
    const Matrix repaired = repair_bridge(x, y, qp.b);
    const double next = weighted_cost(out.coupling, repaired);
    // Keep the previous bridge when the approximate QP plus repair did not improve.
    if (next <= cost)
    {
      out.bridge = repaired;
      cost = next;
    }
    out.history.push_back(cost);
    if (start - cost <= 1e-12 * (1.0 + start))
    {
      out.converged = true;
      break;
    }
  }
  out.upper = std::sqrt(std::max(0.0, cost));
  return out;
}

} // namespace

nlohmann::json DistanceBound::to_json() const
{
  nlohmann::json j;
  j["upper"] = upper;
  j["converged"] = converged;
  j["winning_start"] = winning_start;
  j["history"] = history;
  j["max_qp_residual"] = max_qp_residual;
  nlohmann::json g = nlohmann::json::array(), b = nlohmann::json::array();
  for (Index i = 0; i < coupling.rows(); ++i)
  {
    std::vector<double> gr(coupling.cols()), br(bridge.cols());
    for (Index k = 0; k < coupling.cols(); ++k)
    {
      gr[k] = coupling(i, k);
      br[k] = bridge(i, k);
    }
    g.push_back(gr);
    b.push_back(br);
  }
  j["coupling"] = g;
  j["bridge"] = b;
  return j;
}

DistanceBound d_upper_bound(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Matrix &init,
                            const DistanceOptions &options)
{
  if (options.rounds < 0 || options.restarts < 0)
    throw Error("rounds and restarts must be nonnegative");
  std::vector<Matrix> starts;
  if (init.size() > 0)
  {
    require_shapes(x, y, init);
    if ((init.rowwise().sum() - x.measure()).cwiseAbs().maxCoeff() > 1e-12 ||
        (init.colwise().sum().transpose() - y.measure()).cwiseAbs().maxCoeff() > 1e-12 || init.minCoeff() < 0.0)
      throw Error("initial coupling does not have the marginals m_X and m_Y");
    starts.push_back(init);
  }
  else
  {
    starts.push_back(ordered_coupling(x.measure(), y.measure(), eccentricity_order(x), eccentricity_order(y)));
    CounterRng rng(options.seed, 0x6d6d64ULL);
    for (int r = 0; r < options.restarts; ++r)
    {
      const auto ox = shuffled(x.size(), rng);
      const auto oy = shuffled(y.size(), rng);
      starts.push_back(ordered_coupling(x.measure(), y.measure(), ox, oy));
    }
  }
  std::vector<DistanceBound> runs(starts.size());
  std::vector<std::string> errors(starts.size());
  auto work = [&](std::size_t k) {
    try
    {
      runs[k] = alternate(x, y, starts[k], options);
    }
    catch (const std::exception &e)
    {
      errors[k] = e.what();
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(options.threads, starts.size()));
  for (std::size_t base = 0; base < starts.size(); base += workers)
  {
    std::vector<std::thread> pool;
    for (std::size_t k = base; k < std::min(starts.size(), base + workers); ++k)
    {
      if (workers == 1)
        work(k);
      else
        pool.emplace_back(work, k);
    }
    for (auto &th : pool)
      th.join();
  }
  for (const auto &e : errors)
    if (!e.empty())
      throw Error(e);
  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k)
    if (runs[k].upper < runs[best].upper)
      best = k;
  DistanceBound out = std::move(runs[best]);
  out.winning_start = static_cast<int>(best);
  return out;
}

Matrix even_index_embedding(Index n)
{
  if (n < 1)
    throw Error("embedding needs n >= 1");
  Matrix g = Matrix::Zero(n, 2 * n);
  for (Index i = 0; i < n; ++i)
  {
    g(i, 2 * i) = 0.5 / static_cast<double>(n);
    g(i, 2 * i + 1) = 0.5 / static_cast<double>(n);
  }
  return g;
}

nlohmann::json StabilityReport::to_json() const
{
  nlohmann::json j;
  j["sizes"] = sizes;
  j["check_names"] = check_names;
  j["slacks"] = slacks;
  j["distance_bounds"] = distance_bounds;
  j["slack_nonincreasing"] = slack_nonincreasing;
  j["distance_decreasing"] = distance_decreasing;
  nlohmann::json p = nlohmann::json::array();
  for (const auto &row : passes)
    p.push_back(std::vector<bool>(row.begin(), row.end()));
  j["passes"] = p;
  j["summary"] = check_to_json(summary);
  return j;
}

StabilityReport stability_experiment(const std::vector<GridSpace> &family,
                                     const std::function<std::vector<CheckResult>(const GridSpace &)> &battery,
                                     const DistanceOptions &options)
{
  if (family.empty())
    throw Error("stability experiment needs at least one space");
  StabilityReport rep;
  for (const GridSpace &g : family)
  {
    rep.sizes.push_back(g.size());
    const std::vector<CheckResult> results = battery(g);
    if (rep.check_names.empty())
      for (const auto &r : results)
        rep.check_names.push_back(r.name);
    if (results.size() != rep.check_names.size())
      throw Error("battery returned a different number of checks across refinements");
    std::vector<double> s;
    std::vector<bool> p;
    for (const auto &r : results)
    {
      s.push_back(r.measured_slack);
      p.push_back(r.pass);
    }
    rep.slacks.push_back(std::move(s));
    rep.passes.push_back(std::move(p));
  }
  double slack_increase = 0.0;
  for (std::size_t k = 1; k < rep.slacks.size(); ++k)
    for (std::size_t c = 0; c < rep.check_names.size(); ++c)
    {
      const double d = rep.slacks[k][c] - rep.slacks[k - 1][c];
      slack_increase = std::max(slack_increase, std::isnan(d) ? kInf : d);
    }
  double bound_increase = 0.0;
  for (std::size_t k = 1; k < family.size(); ++k)
  {
    const GridSpace &a = family[k - 1];
    const GridSpace &b = family[k];
    Matrix init;
    const bool refinement = a.model() == ModelKind::circle && b.model() == ModelKind::circle &&
                            b.size() == 2 * a.size();
    if (refinement)
      init = even_index_embedding(a.size());
    const DistanceBound d = d_upper_bound(a.space(), b.space(), init, options);
    rep.distance_bounds.push_back(d.upper);
    if (rep.distance_bounds.size() > 1)
      bound_increase = std::max(bound_increase, d.upper - rep.distance_bounds[rep.distance_bounds.size() - 2]);
  }
  rep.slack_nonincreasing = slack_increase <= 1e-9;
  rep.distance_decreasing = bound_increase <= 1e-9;
  rep.summary = CheckResult::make("stability", "stability of the curvature bound under refinement",
                                  std::max(slack_increase, bound_increase), 1e-9);
  rep.summary.set("max_slack_increase", slack_increase);
  rep.summary.set("max_distance_increase", bound_increase);
  return rep;
}

} // namespace ricci
