#include "oracles.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace oracle
{

namespace
{

// Solves a basis given as a spanning tree of the bipartite graph by peeling leaves.
// Returns false when the tree solution has a negative entry.
bool solve_tree(const std::vector<std::pair<int, int>> &cells, const Vec &mu, const Vec &nu, Mat &g)
{
  const int n = static_cast<int>(mu.size()), m = static_cast<int>(nu.size());
  std::vector<double> row = std::vector<double>(mu.data(), mu.data() + n);
  std::vector<double> col = std::vector<double>(nu.data(), nu.data() + m);
  std::vector<int> degree(n + m, 0);
  for (auto [i, j] : cells)
  {
    ++degree[i];
    ++degree[n + j];
  }
  std::vector<bool> used(cells.size(), false);
  g = Mat::Zero(n, m);
  for (std::size_t round = 0; round < cells.size(); ++round)
  {
    bool found = false;
    for (std::size_t k = 0; k < cells.size() && !found; ++k)
    {
      if (used[k])
        continue;
      const auto [i, j] = cells[k];
      double value;
      if (degree[i] == 1)
        value = row[i];
      else if (degree[n + j] == 1)
        value = col[j];
      else
        continue;
      g(i, j) = value;
      row[i] -= value;
      col[j] -= value;
      --degree[i];
      --degree[n + j];
      used[k] = true;
      found = true;
    }
    if (!found)
      return false;
  }
  return g.minCoeff() >= -1e-13;
}

} // namespace

VertexResult transport_by_vertices(const Mat &cost, const Vec &mu, const Vec &nu)
{
  const int n = static_cast<int>(mu.size()), m = static_cast<int>(nu.size());
  const int need = n + m - 1;
  VertexResult out;
  out.value = std::numeric_limits<double>::infinity();
  std::vector<std::pair<int, int>> chosen;
  // Union-find with undo by copying; the graphs have at most ten nodes.
  std::function<void(int, std::vector<int>)> rec = [&](int start, std::vector<int> parent) {
    if (static_cast<int>(chosen.size()) == need)
    {
      Mat g;
      if (solve_tree(chosen, mu, nu, g))
      {
        ++out.vertices;
        out.value = std::min(out.value, (g.array() * cost.array()).sum());
      }
      return;
    }
    const int remaining = n * m - start;
    if (remaining < need - static_cast<int>(chosen.size()))
      return;
    for (int c = start; c < n * m; ++c)
    {
      const int i = c / m, j = c % m;
      auto find = [&](int x) {
        while (parent[x] != x)
          x = parent[x];
        return x;
      };
      const int ri = find(i), rj = find(n + j);
      if (ri == rj)
        continue;
      std::vector<int> next = parent;
      next[ri] = rj;
      chosen.push_back({i, j});
      rec(c + 1, next);
      chosen.pop_back();
    }
  };
  std::vector<int> parent(n + m);
  for (int k = 0; k < n + m; ++k)
    parent[k] = k;
  rec(0, parent);
  return out;
}

Vec TwoPoint::heat(const Vec &f, double t) const
{
  const double mean = a * f[0] + b() * f[1];
  const double delta = f[1] - f[0];
  const double e = std::exp(-gap() * t);
  Vec out(2);
  out[0] = mean - b() * delta * e;
  out[1] = mean + a * delta * e;
  return out;
}

Mat TwoPoint::kernel(double t) const
{
  const double e = std::exp(-gap() * t);
  Mat p(2, 2);
  p(0, 0) = 1.0 + (b() / a) * e;
  p(0, 1) = 1.0 - e;
  p(1, 0) = 1.0 - e;
  p(1, 1) = 1.0 + (a / b()) * e;
  return p;
}

Vec TwoPoint::gamma(const Vec &f) const
{
  const double d2 = (f[1] - f[0]) * (f[1] - f[0]);
  Vec out(2);
  out[0] = w * d2 / (2.0 * a);
  out[1] = w * d2 / (2.0 * b());
  return out;
}

double TwoPoint::fisher(const Vec &rho) const
{
  const double d = std::sqrt(rho[1]) - std::sqrt(rho[0]);
  return 2.0 * w * d * d;
}

double TwoPoint::entropy(const Vec &mu) const
{
  double s = 0.0;
  const double m[2] = {a, b()};
  for (int x = 0; x < 2; ++x)
    if (mu[x] > 0.0)
      s += mu[x] * std::log(mu[x] / m[x]);
  return s;
}

double TwoPoint::bakry_emery_constant() const
{
  // Gamma(H_t f)(x) = w d^2 e^{-2 gap t} / (2 m_x) and H_t Gamma(f)(x) is explicit, so the
  // constant at x and t is gap + log R_x(t) / (2t) with R_0 = 2a - (a - b) e^{-gap t}.
  const double lam = gap();
  double best = std::numeric_limits<double>::infinity();
  for (int x = 0; x < 2; ++x)
  {
    const double s = x == 0 ? a - b() : b() - a;
    const double mx = x == 0 ? a : b();
    best = std::min(best, lam + lam * s / 2.0);
    for (double lt = -8.0; lt <= 3.0; lt += 1e-3)
    {
      const double t = std::pow(10.0, lt);
      const double r = 2.0 * mx - s * std::exp(-lam * t);
      best = std::min(best, lam + std::log(r) / (2.0 * t));
    }
  }
  return best;
}

double TwoPoint::log_sobolev_constant() const
{
  auto ratio = [&](double s) {
    const double e = w * (s - 1.0) * (s - 1.0);
    const double f2[2] = {1.0, s * s};
    const double mean = a * f2[0] + b() * f2[1];
    double ent = 0.0;
    const double m[2] = {a, b()};
    for (int x = 0; x < 2; ++x)
      if (f2[x] > 0.0)
        ent += m[x] * f2[x] * std::log(f2[x] / mean);
    return 2.0 * e / ent;
  };
  // Near constants Ent(f^2) ~ 2 Var(f), so the ratio tends to the spectral gap.
  double best = gap();
  for (double s = -50.0; s <= 50.0; s += 1e-3)
    if (std::abs(s - 1.0) > 1e-2)
      best = std::min(best, ratio(s));
  return best;
}

Vec hopf_lax(const Mat &d, const Vec &g, double t)
{
  const Eigen::Index n = d.rows();
  Vec q(n);
  for (Eigen::Index x = 0; x < n; ++x)
  {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index y = 0; y < n; ++y)
      best = std::min(best, g[y] + d(x, y) * d(x, y) / (2.0 * t));
    q[x] = best;
  }
  return q;
}

Mat cycle_kernel(int n, double t)
{
  Mat p(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
    {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
      {
        const double th = 2.0 * M_PI * k / n;
        s += std::exp(-(2.0 - 2.0 * std::cos(th)) * t) * std::cos(th * (x - y));
      }
      // The 1/n of the Fourier sum cancels against the density normalization by m = 1/n.
      p(x, y) = s;
    }
  return p;
}

Mat expm(const Mat &a, double t)
{
  Mat x = a * t;
  const double norm = x.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25)
    ++squarings;
  x /= std::pow(2.0, squarings);
  Mat term = Mat::Identity(a.rows(), a.cols());
  Mat sum = term;
  for (int k = 1; k <= 18; ++k)
  {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < squarings; ++k)
    sum = sum * sum;
  return sum;
}

std::uint64_t Rng::next()
{
  std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal()
{
  double u = uniform();
  while (u <= 0.0)
    u = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * uniform());
}

} // namespace oracle
