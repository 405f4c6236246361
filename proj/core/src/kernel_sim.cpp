#include "ricci/kernel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ricci/evi_lab.hpp"

namespace ricci
{

std::string HeatKernel::to_csv() const
{
  DiagnosticTable tab;
  tab.columns = {"x", "y", "p"};
  for (Index x = 0; x < p.rows(); ++x)
    for (Index y = 0; y < p.cols(); ++y)
      tab.add_row({static_cast<double>(x), static_cast<double>(y), p(x, y)});
  return tab.to_csv();
}

HeatKernel heat_kernel(const HeatOperator &ho, double t)
{
  if (!(t > 0.0))
    throw Error("heat kernel needs t > 0");
  const Vector &m = ho.structure().measure();
  HeatKernel k;
  k.t = t;
  if (ho.mode() == HeatMode::spectral)
  {
    // p = M^{-1/2} V e^{-lambda t} V^T M^{-1/2}, assembled from the cached spectrum.
    const Matrix left = m.cwiseSqrt().cwiseInverse().asDiagonal() * ho.eigenvectors();
    Vector e = (-t * ho.eigenvalues()).array().exp();
    k.p = left * e.asDiagonal() * left.transpose();
  }
  else
  {
    k.p = ho.matrix(t) * m.cwiseInverse().asDiagonal();
  }
  for (Index x = 0; x < k.p.rows(); ++x)
    for (Index y = 0; y < k.p.cols(); ++y)
      if (k.p(x, y) < 0.0)
      {
        k.most_negative = std::min(k.most_negative, k.p(x, y));
        k.clipped_mass += -k.p(x, y) * m[y];
        k.p(x, y) = 0.0;
      }
  return k;
}

CheckResult symmetry_check(const HeatKernel &kernel, double tol)
{
  const double asym = (kernel.p - kernel.p.transpose()).cwiseAbs().maxCoeff();
  CheckResult r = CheckResult::make("kernel_symmetry", "symmetry of the transition densities", asym, tol);
  r.set("t", kernel.t);
  r.set("clipped_mass", kernel.clipped_mass);
  return r;
}

CheckResult chapman_kolmogorov_check(const HeatOperator &ho, double t, double s, double tol)
{
  const Vector &m = ho.structure().measure();
  const HeatKernel a = heat_kernel(ho, t);
  const HeatKernel b = heat_kernel(ho, s);
  const HeatKernel ab = heat_kernel(ho, t + s);
  const Matrix composed = a.p * m.asDiagonal() * b.p;
  const double err = (ab.p - composed).cwiseAbs().maxCoeff();
  CheckResult r = CheckResult::make("chapman_kolmogorov", "Chapman-Kolmogorov formula", err, tol);
  r.set("t", t);
  r.set("s", s);
  return r;
}

CheckResult w1_l1_check(const GridSpace &grid, const HeatOperator &ho, double K, double t,
                        const std::vector<std::pair<Index, Index>> &pairs)
{
  const MetricMeasureSpace &s = grid.space();
  const Vector &m = s.measure();
  const HeatKernel k = heat_kernel(ho, t);
  const double factor = std::sqrt(ik(2.0 * K, t));
  CheckResult r;
  r.diagnostics.columns = {"x", "y", "lhs", "distance"};
  double worst = -kInf;
  for (const auto &[x, y] : pairs)
  {
    if (x < 0 || y < 0 || x >= s.size() || y >= s.size())
      throw Error("pair index out of range");
    const double l1 = ordered_dot(m, (k.p.row(x) - k.p.row(y)).transpose().cwiseAbs());
    const double lhs = factor * l1;
    worst = std::max(worst, lhs - s.d(x, y));
    r.diagnostics.add_row({static_cast<double>(x), static_cast<double>(y), lhs, s.d(x, y)});
  }
  r.name = "w1_l1";
  r.anchor = "W1-L1 regularization of the heat kernel";
  r.measured_slack = std::max(0.0, worst);
  r.tolerance = 2.0 * grid.h() + 1e-10;
  r.finalize();
  r.set("K", K);
  r.set("t", t);
  r.set("worst_margin", worst);
  return r;
}

Index SamplePath::state_at(double t) const
{
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  return states[static_cast<std::size_t>(it - jump_times.begin())];
}

std::string SamplePath::to_csv() const
{
  DiagnosticTable tab;
  tab.columns = {"t_jump", "state"};
  tab.add_row({0.0, static_cast<double>(states.front())});
  for (std::size_t k = 0; k < jump_times.size(); ++k)
    tab.add_row({jump_times[k], static_cast<double>(states[k + 1])});
  return tab.to_csv();
}

namespace
{

struct JumpTable
{
  std::vector<double> rate;
  std::vector<std::vector<std::pair<Index, double>>> cumulative;
};

JumpTable jump_table(const DirichletStructure &ds)
{
  const Index n = ds.size();
  const Vector &m = ds.measure();
  JumpTable jt;
  jt.rate.assign(n, 0.0);
  jt.cumulative.resize(n);
  std::vector<std::vector<std::pair<Index, double>>> out(n);
  for (const Edge &e : ds.edges())
  {
    out[e.u].push_back({e.v, e.w / m[e.u]});
    out[e.v].push_back({e.u, e.w / m[e.v]});
  }
  for (Index x = 0; x < n; ++x)
  {
    std::sort(out[x].begin(), out[x].end());
    double c = 0.0;
    for (const auto &[y, q] : out[x])
    {
      c += q;
      jt.cumulative[x].push_back({y, c});
    }
    jt.rate[x] = c;
  }
  return jt;
}

SamplePath sample_path(const JumpTable &jt, Index x0, double T, std::uint64_t seed, std::uint64_t path_index)
{
  CounterRng rng(seed, path_index);
  SamplePath p;
  p.horizon = T;
  p.states.push_back(x0);
  Index x = x0;
  double t = 0.0;
  while (true)
  {
    const double r = jt.rate[x];
    if (r == 0.0)
    {
      if (jt.rate.size() > 1)
        throw Error("state " + std::to_string(x) + " is absorbing");
      break;
    }
    t += rng.exponential(r);
    if (t > T)
      break;
    const double u = rng.uniform() * r;
    const auto &cum = jt.cumulative[x];
    auto it = std::upper_bound(cum.begin(), cum.end(), u,
                               [](double v, const std::pair<Index, double> &e) { return v < e.second; });
    if (it == cum.end())
      --it;
    x = it->first;
    p.jump_times.push_back(t);
    p.states.push_back(x);
  }
  return p;
}

bool connected(const DirichletStructure &ds)
{
  const Index n = ds.size();
  std::vector<std::vector<Index>> adj(n);
  for (const Edge &e : ds.edges())
  {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<char> seen(n, 0);
  std::vector<Index> stack{0};
  seen[0] = 1;
  Index count = 1;
  while (!stack.empty())
  {
    const Index x = stack.back();
    stack.pop_back();
    for (Index y : adj[x])
      if (!seen[y])
      {
        seen[y] = 1;
        ++count;
        stack.push_back(y);
      }
  }
  return count == n;
}

} // namespace

SamplePath sample_brownian(const DirichletStructure &ds, Index x0, double T, std::uint64_t seed,
                           std::uint64_t path_index)
{
  if (x0 < 0 || x0 >= ds.size())
    throw Error("start state out of range");
  if (!(T >= 0.0))
    throw Error("horizon must be nonnegative");
  return sample_path(jump_table(ds), x0, T, seed, path_index);
}

CheckResult empirical_vs_kernel_check(const DirichletStructure &ds, const HeatOperator &ho, Index x0, double T,
                                      std::int64_t N, std::uint64_t seed, int threads, double tv_constant)
{
  if (N < 1)
    throw Error("need at least one path");
  if (x0 < 0 || x0 >= ds.size())
    throw Error("start state out of range");
  const Index n = ds.size();
  const JumpTable jt = jump_table(ds);
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::min<std::int64_t>(N, 256))));
  std::vector<std::vector<std::int64_t>> counts(workers, std::vector<std::int64_t>(n, 0));
  std::vector<std::string> errors(workers);
  auto work = [&](int w) {
    try
    {
      for (std::int64_t k = w; k < N; k += workers)
      {
        const SamplePath p = sample_path(jt, x0, T, seed, static_cast<std::uint64_t>(k));
        ++counts[w][p.states.back()];
      }
    }
    catch (const std::exception &e)
    {
      errors[w] = e.what();
    }
  };
  if (workers == 1)
    work(0);
  else
  {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(work, w);
    for (auto &th : pool)
      th.join();
  }
  for (const auto &e : errors)
    if (!e.empty())
      throw Error(e);

  Vector target(n);
  if (T > 0.0)
  {
    const HeatKernel k = heat_kernel(ho, T);
    target = k.p.row(x0).transpose().cwiseProduct(ds.measure());
  }
  else
    target = Vector::Unit(n, x0);
  CheckResult r;
  r.diagnostics.columns = {"state", "empirical", "kernel"};
  double tv = 0.0;
  for (Index y = 0; y < n; ++y)
  {
    std::int64_t c = 0;
    for (int w = 0; w < workers; ++w)
      c += counts[w][y];
    const double emp = static_cast<double>(c) / static_cast<double>(N);
    tv += std::abs(emp - target[y]);
    r.diagnostics.add_row({static_cast<double>(y), emp, target[y]});
  }
  tv *= 0.5;
  r.name = "brownian_empirical";
  r.anchor = "law of the Brownian motion is the heat kernel";
  r.measured_slack = tv;
  r.tolerance = tv_constant * std::sqrt(static_cast<double>(n) / static_cast<double>(N));
  r.finalize();
  r.set("T", T);
  r.set("paths", static_cast<long long>(N));
  r.set("seed", std::to_string(seed));
  r.set("start", x0);
  r.set("connected", connected(ds));
  return r;
}

} // namespace ricci
