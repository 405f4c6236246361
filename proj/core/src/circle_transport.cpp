#include "ricci/circle_transport.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ricci
{

namespace
{

// Two-point Gauss-Legendre nodes on [0, 1]; exact for the cubic integrands used here.
constexpr double kNode1 = 0.5 - 0.28867513459481287;
constexpr double kNode2 = 0.5 + 0.28867513459481287;

class CellMeasures
{
public:
  CellMeasures(const GridSpace &grid, const Vector &mu, const Vector &nu)
      : n_(mu.size()), h_(grid.h()), periodic_(grid.model() == ModelKind::circle)
  {
    if (grid.model() != ModelKind::circle && grid.model() != ModelKind::interval)
      throw Error("cell transport needs a one-dimensional model grid");
    if (mu.size() != grid.size() || nu.size() != grid.size())
      throw Error("measure size does not match the grid");
    origin_ = -0.5 * h_;
    period_ = static_cast<double>(n_) * h_;
    a_ = mu / ordered_sum(mu);
    b_ = nu / ordered_sum(nu);
    F_ = cumulative(a_);
    G_ = cumulative(b_);
  }

  bool periodic() const { return periodic_; }
  double period() const { return period_; }
  double origin() const { return origin_; }
  double h() const { return h_; }
  Index n() const { return n_; }
  const std::vector<double> &F() const { return F_; }
  const std::vector<double> &G() const { return G_; }

  double X(double s) const { return quantile(F_, a_, s); }
  double Y(double s) const { return quantile(G_, b_, s); }

  double Gcdf(double u) const
  {
    double r = u - origin_;
    double wraps = 0.0;
    if (periodic_)
    {
      wraps = std::floor(r / period_);
      r -= wraps * period_;
    }
    r = std::clamp(r, 0.0, period_);
    const Index k = std::min<Index>(n_ - 1, static_cast<Index>(std::floor(r / h_)));
    return wraps + G_[k] + (r - static_cast<double>(k) * h_) / h_ * b_[k];
  }

  // Squared cost of the coupling X(s) -> Y(s + theta).
  double cost(double theta) const
  {
    std::vector<double> br;
    for (double f : F_)
      br.push_back(f);
    for (double g : G_)
      br.push_back(frac(g - theta));
    br.push_back(0.0);
    br.push_back(1.0);
    sort_unique(br);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < br.size(); ++k)
    {
      const double sa = br[k], sb = br[k + 1], d = sb - sa;
      if (d <= 0.0)
        continue;
      const double s1 = sa + kNode1 * d, s2 = sa + kNode2 * d;
      const double d1 = X(s1) - Y(s1 + theta);
      const double d2 = X(s2) - Y(s2 + theta);
      total += 0.5 * d * (d1 * d1 + d2 * d2);
    }
    return total;
  }

  struct Piece
  {
    double ua, ub, ga, gb;
  };

  // Linear pieces of g(u) = u - X(G(u) - theta) over one period of the target.
  std::vector<Piece> displacement(double theta) const
  {
    std::vector<double> br;
    for (Index k = 0; k <= n_; ++k)
      br.push_back(origin_ + static_cast<double>(k) * h_);
    for (double f : F_)
    {
      double u = Y(f + theta);
      if (periodic_)
        u -= std::floor((u - origin_) / period_) * period_;
      br.push_back(u);
    }
    sort_unique(br);
    std::vector<Piece> pieces;
    for (std::size_t k = 0; k + 1 < br.size(); ++k)
    {
      const double ua = br[k], ub = br[k + 1], d = ub - ua;
      if (d <= 0.0 || ua < origin_ || ub > origin_ + period_ + 1e-15 * period_)
        continue;
      const double u1 = ua + kNode1 * d, u2 = ua + kNode2 * d;
      const double g1 = u1 - X(Gcdf(u1) - theta);
      const double g2 = u2 - X(Gcdf(u2) - theta);
      const double slope = (g2 - g1) / (u2 - u1);
      pieces.push_back({ua, ub, g1 - slope * (u1 - ua), g1 + slope * (ub - u1)});
    }
    return pieces;
  }

  // J'(theta) / 2 = integral of the displacement over one period.
  double mean_displacement(double theta) const
  {
    double s = 0.0;
    for (const Piece &p : displacement(theta))
      s += 0.5 * (p.ub - p.ua) * (p.ga + p.gb);
    return s;
  }

private:
  static std::vector<double> cumulative(const Vector &v)
  {
    std::vector<double> c(v.size() + 1, 0.0);
    for (Index i = 0; i < v.size(); ++i)
      c[i + 1] = c[i] + v[i];
    c.back() = 1.0;
    return c;
  }

  static double frac(double x) { return x - std::floor(x); }

  static void sort_unique(std::vector<double> &v)
  {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  double quantile(const std::vector<double> &C, const Vector &w, double s) const
  {
    double wraps = 0.0;
    if (periodic_)
    {
      wraps = std::floor(s);
      s -= wraps;
    }
    double x;
    if (s >= 1.0)
      x = origin_ + period_;
    else if (s <= 0.0)
      x = origin_;
    else
    {
      const Index k = static_cast<Index>(std::upper_bound(C.begin(), C.end(), s) - C.begin()) - 1;
      const Index kk = std::clamp<Index>(k, 0, n_ - 1);
      x = origin_ + static_cast<double>(kk) * h_ + (w[kk] > 0.0 ? (s - C[kk]) / w[kk] * h_ : 0.0);
    }
    return x + wraps * period_;
  }

  Index n_;
  double h_;
  bool periodic_;
  double origin_ = 0.0;
  double period_ = 0.0;
  Vector a_, b_;
  std::vector<double> F_, G_;
};

// Root of the increasing function J'(theta) by a bracketed Illinois iteration.
double optimal_rotation(const CellMeasures &cm, double hint)
{
  auto f = [&](double t) { return cm.mean_displacement(t); };
  double lo = hint, hi = hint;
  double flo = f(lo), fhi = flo;
  if (flo == 0.0)
    return hint;
  double step = 0.05;
  if (flo < 0.0)
  {
    while (fhi < 0.0)
    {
      lo = hi;
      flo = fhi;
      hi += step;
      step *= 2.0;
      fhi = f(hi);
    }
  }
  else
  {
    while (flo > 0.0)
    {
      hi = lo;
      fhi = flo;
      lo -= step;
      step *= 2.0;
      flo = f(lo);
    }
  }
  const double scale = cm.period() * cm.period();
  int side = 0;
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it)
  {
    mid = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(mid > lo && mid < hi))
      mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= 1e-15 * scale || hi - lo <= 1e-15)
      break;
    if (fm < 0.0)
    {
      lo = mid;
      flo = fm;
      if (side == -1)
        fhi *= 0.5;
      side = -1;
    }
    else
    {
      hi = mid;
      fhi = fm;
      if (side == 1)
        flo *= 0.5;
      side = 1;
    }
  }
  return mid;
}

} // namespace

CellTransport cell_transport(const GridSpace &grid, const Vector &mu, const Vector &nu, bool with_potential,
                             double theta_hint)
{
  const CellMeasures cm(grid, mu, nu);
  CellTransport out;
  out.theta = cm.periodic() ? optimal_rotation(cm, theta_hint) : 0.0;
  out.w2_squared = cm.cost(out.theta);
  if (!with_potential)
    return out;

  const Index n = cm.n();
  Vector integral = Vector::Zero(n);
  double psi = 0.0;
  for (const auto &p : cm.displacement(out.theta))
  {
    const double d = p.ub - p.ua;
    const Index cell =
        std::clamp<Index>(static_cast<Index>(std::floor((0.5 * (p.ua + p.ub) - cm.origin()) / cm.h())), 0, n - 1);
    integral[cell] += d * (psi + d * (p.ga / 3.0 + p.gb / 6.0));
    psi += 0.5 * d * (p.ga + p.gb);
  }
  out.potential = integral / cm.h();
  out.potential.array() -= out.potential.mean();
  return out;
}

} // namespace ricci
