#include "ricci/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

namespace ricci
{

DirichletStructure::DirichletStructure(MetricMeasureSpace space, Matrix weights)
    : space_(std::make_shared<const MetricMeasureSpace>(std::move(space))), w_(std::move(weights))
{
  const Index n = space_->size();
  if (w_.rows() != n || w_.cols() != n)
    throw Error("edge weight table does not match the space");
  for (Index i = 0; i < n; ++i)
    if (!(space_->mass(i) > 0.0))
      throw Error("Dirichlet structures need strictly positive masses (point " + std::to_string(i) + ")");
  for (Index i = 0; i < n; ++i)
  {
    if (w_(i, i) != 0.0)
      throw Error("edge weights must have a zero diagonal");
    for (Index j = i + 1; j < n; ++j)
    {
      if (w_(i, j) != w_(j, i))
        throw Error("edge weights must be symmetric");
      if (w_(i, j) < 0.0 || !std::isfinite(w_(i, j)))
        throw Error("edge weights must be finite and nonnegative");
      if (w_(i, j) > 0.0)
        edges_.push_back({i, j, w_(i, j)});
    }
  }
}

Vector DirichletStructure::laplacian(const Vector &f) const
{
  Vector out = Vector::Zero(size());
  for (const Edge &e : edges_)
  {
    const double flux = e.w * (f[e.v] - f[e.u]);
    out[e.u] += flux;
    out[e.v] -= flux;
  }
  return out.cwiseQuotient(measure());
}

Matrix DirichletStructure::generator() const
{
  Matrix g = w_;
  g.diagonal() = -w_.rowwise().sum();
  return measure().cwiseInverse().asDiagonal() * g;
}

double DirichletStructure::form(const Vector &f, const Vector &g) const
{
  double s = 0.0;
  for (const Edge &e : edges_)
    s += e.w * (f[e.v] - f[e.u]) * (g[e.v] - g[e.u]);
  return s;
}

double DirichletStructure::cheeger(const Vector &f) const { return 0.5 * form(f, f); }

Vector DirichletStructure::gamma(const Vector &f, const Vector &g) const
{
  Vector out = Vector::Zero(size());
  for (const Edge &e : edges_)
  {
    const double term = e.w * (f[e.v] - f[e.u]) * (g[e.v] - g[e.u]);
    out[e.u] += term;
    out[e.v] += term;
  }
  for (Index x = 0; x < size(); ++x)
    out[x] /= 2.0 * measure()[x];
  return out;
}

nlohmann::json DirichletStructure::to_json() const
{
  nlohmann::json j = space_to_json(*space_);
  nlohmann::json w = nlohmann::json::array();
  for (Index i = 0; i < size(); ++i)
  {
    nlohmann::json row = nlohmann::json::array();
    for (Index k = 0; k < size(); ++k)
      row.push_back(w_(i, k));
    w.push_back(std::move(row));
  }
  j["w"] = std::move(w);
  return j;
}

DirichletStructure grid_structure(const GridSpace &grid)
{
  if (!grid.has_model())
    throw Error("stencil weights need a model grid");
  const Index n = grid.size();
  const Vector &m = grid.space().measure();
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (const auto &[j, s] : grid.stencil(i))
      w(i, j) += 0.5 * (m[i] + m[j]) / s;
  return DirichletStructure(grid.space(), std::move(w));
}

DirichletStructure cycle_structure(Index n)
{
  return grid_structure(build_circle_grid(static_cast<double>(n), n));
}

DirichletStructure two_point_structure(double w, double m0)
{
  if (!(w > 0.0))
    throw Error("two-point edge weight must be positive");
  Matrix W(2, 2);
  W << 0.0, w, w, 0.0;
  return DirichletStructure(build_two_point(1.0, m0), std::move(W));
}

namespace
{

Matrix path_lengths(const Matrix &w, const Vector &m)
{
  const Index n = w.rows();
  Matrix d = Matrix::Constant(n, n, kInf);
  for (Index s = 0; s < n; ++s)
  {
    using Item = std::pair<double, Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    d(s, s) = 0.0;
    heap.emplace(0.0, s);
    while (!heap.empty())
    {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > d(s, u))
        continue;
      for (Index v = 0; v < n; ++v)
      {
        if (!(w(u, v) > 0.0))
          continue;
        const double nd = du + std::sqrt(2.0 * std::min(m[u], m[v]) / w(u, v));
        if (nd < d(s, v))
        {
          d(s, v) = nd;
          heap.emplace(nd, v);
        }
      }
    }
  }
  return d;
}

} // namespace

DirichletStructure graph_structure(const Matrix &weights, const Vector &measure)
{
  Matrix d = path_lengths(weights, measure);
  if (!d.allFinite())
    throw Error("graph is disconnected; its path metric is not finite");
  d = 0.5 * (d + d.transpose()).eval();
  return DirichletStructure(MetricMeasureSpace(std::move(d), measure), weights);
}

DirichletStructure random_graph_structure(Index n, double chord_probability, std::uint64_t seed)
{
  if (n < 2)
    throw Error("random graph needs at least two points");
  CounterRng rng(seed, 0x6772617068ULL);
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
  {
    for (Index j = i + 1; j < n; ++j)
    {
      const bool ring = (j == i + 1) || (i == 0 && j == n - 1);
      if (ring || rng.uniform() < chord_probability)
        w(i, j) = w(j, i) = 0.5 + rng.uniform();
    }
  }
  Vector m(n);
  for (Index i = 0; i < n; ++i)
    m[i] = 0.5 + rng.uniform();
  m /= ordered_sum(m);
  return graph_structure(w, m);
}

ProductStructure product_structure(const DirichletStructure &x, const DirichletStructure &y)
{
  ProductSpace ps = product_space(x.space(), y.space());
  const ProductMap map = ps.map;
  const Index n = map.size();
  Matrix w = Matrix::Zero(n, n);
  for (Index a = 0; a < n; ++a)
  {
    const auto [xa, ya] = map.split(a);
    for (Index xb = 0; xb < map.nx; ++xb)
      if (xb != xa)
        w(a, map.index(xb, ya)) += x.weights()(xa, xb) * y.measure()[ya];
    for (Index yb = 0; yb < map.ny; ++yb)
      if (yb != ya)
        w(a, map.index(xa, yb)) += y.weights()(ya, yb) * x.measure()[xa];
  }
  return {DirichletStructure(std::move(ps.space), std::move(w)), map};
}

DirichletStructure restricted_structure(const DirichletStructure &ds, const std::vector<Index> &indices)
{
  const Index k = static_cast<Index>(indices.size());
  if (k == 0)
    throw Error("restriction to an empty set");
  double total = 0.0;
  for (Index i : indices)
    total += ds.measure()[i];
  Matrix d(k, k), w(k, k);
  Vector m(k);
  for (Index p = 0; p < k; ++p)
  {
    m[p] = ds.measure()[indices[p]] / total;
    for (Index q = 0; q < k; ++q)
    {
      d(p, q) = ds.space().d(indices[p], indices[q]);
      w(p, q) = ds.weights()(indices[p], indices[q]) / total;
    }
  }
  return DirichletStructure(MetricMeasureSpace(std::move(d), std::move(m)), std::move(w));
}

// ---------------------------------------------------------------------------
// Heat semigroup

HeatOperator::HeatOperator(DirichletStructure ds, HeatMode mode, double euler_step)
    : ds_(std::move(ds)), mode_(mode), step_(euler_step)
{
  if (!(step_ > 0.0))
    throw Error("implicit Euler step must be positive");
  sqrt_m_ = ds_.measure().cwiseSqrt();
  if (mode_ == HeatMode::spectral && ds_.size() > kSpectralCap)
    mode_ = HeatMode::implicit_euler;
  if (mode_ == HeatMode::spectral)
  {
    Matrix g = ds_.weights();
    g.diagonal() = -ds_.weights().rowwise().sum();
    const Vector inv = sqrt_m_.cwiseInverse();
    Matrix s = inv.asDiagonal() * g * inv.asDiagonal();
    s = 0.5 * (s + s.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(-s);
    if (eig.info() != Eigen::Success)
      throw Error("eigendecomposition of the heat generator failed");
    lambda_ = eig.eigenvalues().cwiseMax(0.0);
    basis_ = eig.eigenvectors();
  }
}

const Vector &HeatOperator::eigenvalues() const
{
  if (mode_ != HeatMode::spectral)
    throw Error("spectrum is only cached in spectral mode");
  return lambda_;
}

const Matrix &HeatOperator::eigenvectors() const
{
  if (mode_ != HeatMode::spectral)
    throw Error("spectrum is only cached in spectral mode");
  return basis_;
}

double HeatOperator::spectral_gap() const
{
  const Vector &l = eigenvalues();
  return l.size() > 1 ? l[1] : 0.0;
}

Vector HeatOperator::euler_solve(const Vector &f, double t, Index steps) const
{
  const double s = t / static_cast<double>(steps);
  const Index n = ds_.size();
  std::vector<Eigen::Triplet<double>> trip;
  Vector diag = ds_.measure();
  for (const Edge &e : ds_.edges())
  {
    trip.emplace_back(e.u, e.v, -s * e.w);
    trip.emplace_back(e.v, e.u, -s * e.w);
    diag[e.u] += s * e.w;
    diag[e.v] += s * e.w;
  }
  for (Index i = 0; i < n; ++i)
    trip.emplace_back(i, i, diag[i]);
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(10 * n + 100);
  cg.compute(a);
  Vector u = f;
  for (Index k = 0; k < steps; ++k)
  {
    const Vector rhs = ds_.measure().cwiseProduct(u);
    Vector next = cg.solveWithGuess(rhs, u);
    if (cg.info() != Eigen::Success)
      throw Error("conjugate gradient did not reach its residual target");
    u = std::move(next);
  }
  return u;
}

Vector HeatOperator::apply(const Vector &f, double t) const
{
  if (!(t >= 0.0))
    throw Error("heat semigroup time must be nonnegative");
  if (f.size() != ds_.size())
    throw Error("function size does not match the structure");
  if (t == 0.0)
    return f;
  if (mode_ == HeatMode::spectral)
  {
    Vector c = basis_.transpose() * sqrt_m_.cwiseProduct(f);
    for (Index k = 0; k < c.size(); ++k)
      c[k] *= std::exp(-lambda_[k] * t);
    return (basis_ * c).cwiseQuotient(sqrt_m_);
  }
  const Index steps = std::max<Index>(1, static_cast<Index>(std::ceil(t / step_ - 1e-9)));
  // Richardson extrapolation of the first-order scheme.
  return 2.0 * euler_solve(f, t, 2 * steps) - euler_solve(f, t, steps);
}

Matrix HeatOperator::matrix(double t) const
{
  const Index n = ds_.size();
  if (mode_ == HeatMode::spectral)
  {
    Vector e(n);
    for (Index k = 0; k < n; ++k)
      e[k] = std::exp(-lambda_[k] * t);
    const Matrix left = sqrt_m_.cwiseInverse().asDiagonal() * basis_;
    const Matrix right = basis_.transpose() * sqrt_m_.asDiagonal();
    return left * e.asDiagonal() * right;
  }
  Matrix out(n, n);
  for (Index k = 0; k < n; ++k)
    out.col(k) = apply(Vector::Unit(n, k), t);
  return out;
}

nlohmann::json HeatOperator::spectrum_json() const
{
  nlohmann::json j;
  j["mode"] = mode_ == HeatMode::spectral ? "spectral" : "implicit_euler";
  if (mode_ == HeatMode::spectral)
    j["eigenvalues"] = std::vector<double>(lambda_.data(), lambda_.data() + lambda_.size());
  else
    j["euler_step"] = step_;
  return j;
}

// ---------------------------------------------------------------------------
// Gamma calculus checks

double energy_measure(const DirichletStructure &ds, const Vector &f, const Vector &phi)
{
  const Vector fphi = f.cwiseProduct(phi);
  const Vector half_sq = 0.5 * f.cwiseProduct(f);
  return ds.form(f, fphi) - ds.form(half_sq, phi);
}

CheckResult energy_measure_limit_check(const HeatOperator &ho, const Vector &f, const std::vector<double> &times)
{
  if (times.size() < 2)
    throw Error("the limit check needs at least two times");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] < times[k - 1]) || !(times[k] > 0.0))
      throw Error("limit-check times must decrease to zero");
  const Vector target = ho.structure().gamma(f);
  const Vector f2 = f.cwiseProduct(f);
  std::vector<double> errors;
  CheckResult r;
  r.diagnostics.columns = {"t", "sup_error"};
  for (double t : times)
  {
    const Vector hf = ho.apply(f, t);
    const Vector hf2 = ho.apply(f2, t);
    const Vector q = (f2 + hf2 - 2.0 * f.cwiseProduct(hf)) / (2.0 * t);
    errors.push_back((q - target).cwiseAbs().maxCoeff());
    r.diagnostics.add_row({t, errors.back()});
  }
  double worst = 0.0;
  double min_order = kInf;
  for (std::size_t k = 1; k < times.size(); ++k)
  {
    double order = 1.0;
    if (errors[k - 1] > 1e-300 && errors[k] > 1e-300)
      order = std::log(errors[k - 1] / errors[k]) / std::log(times[k - 1] / times[k]);
    else if (errors[k] > errors[k - 1])
      order = 0.0;
    min_order = std::min(min_order, order);
    worst = std::max(worst, std::abs(order - 1.0));
  }
  r.name = "energy_measure_limit";
  r.anchor = "short-time semigroup limit of the energy measure density";
  r.measured_slack = worst;
  r.tolerance = 0.2;
  r.finalize();
  r.set("min_observed_order", min_order);
  r.set("final_error", errors.back());
  return r;
}

CheckResult leibnitz_check(const DirichletStructure &ds, const Vector &f, const Vector &g, const Vector &h,
                           double tol)
{
  const double lhs = ds.form(f, g.cwiseProduct(h));
  const Vector &m = ds.measure();
  const double rhs =
      ordered_dot(m, h.cwiseProduct(ds.gamma(f, g))) + ordered_dot(m, g.cwiseProduct(ds.gamma(f, h)));
  CheckResult r = CheckResult::make("leibnitz", "integrated Leibnitz rule for the carre du champ",
                                    std::abs(lhs - rhs), tol);
  r.set("lhs", lhs);
  r.set("rhs", rhs);
  return r;
}

CheckResult parallelogram_check(const DirichletStructure &ds, const Vector &f, const Vector &g, double tol)
{
  const Vector s = f + g;
  const Vector d = f - g;
  const double integrated =
      std::abs(ds.cheeger(s) + ds.cheeger(d) - 2.0 * ds.cheeger(f) - 2.0 * ds.cheeger(g));
  const double pointwise =
      (ds.gamma(s) + ds.gamma(d) - 2.0 * ds.gamma(f) - 2.0 * ds.gamma(g)).cwiseAbs().maxCoeff();
  CheckResult r = CheckResult::make("parallelogram", "parallelogram identity of the Cheeger energy",
                                    std::max(integrated, pointwise), tol);
  r.set("integrated_residual", integrated);
  r.set("pointwise_residual", pointwise);
  return r;
}

// ---------------------------------------------------------------------------
// Intrinsic distance

IntrinsicBounds intrinsic_distance_bounds(const DirichletStructure &ds, Index x, Index y, int iterations)
{
  const Index n = ds.size();
  if (x < 0 || y < 0 || x >= n || y >= n)
    throw Error("intrinsic distance endpoints out of range");
  IntrinsicBounds out;
  if (x == y)
    return out;
  const Matrix lengths = path_lengths(ds.weights(), ds.measure());
  out.upper = lengths(x, y);
  if (!std::isfinite(out.upper))
  {
    out.upper = kInf;
    out.lower = 0.0;
    return out;
  }

  auto ratio = [&](const Vector &g) {
    const double mx = ds.gamma(g).maxCoeff();
    return mx > 0.0 ? (g[x] - g[y]) / std::sqrt(mx) : 0.0;
  };
  // Truncated path distance from y as the starting candidate.
  Vector g(n);
  for (Index z = 0; z < n; ++z)
    g[z] = std::min(lengths(z, y), out.upper);
  double best = std::max(0.0, ratio(g));

  // Ascent on (g_x - g_y) / sqrt(smooth max Gamma(g)); every iterate is scored by the exact ratio.
  const Vector &m = ds.measure();
  double beta = 20.0;
  double step = 0.1;
  auto normalize = [&](Vector &v) {
    const double mx = ds.gamma(v).maxCoeff();
    if (mx > 0.0)
      v /= std::sqrt(mx);
  };
  normalize(g);
  auto smooth_objective = [&](const Vector &v, Vector *grad) {
    const Vector gm = ds.gamma(v);
    const double mx = gm.maxCoeff();
    Vector wts = ((gm.array() - mx) * beta).exp();
    const double z = wts.sum();
    const double smax = mx + std::log(z) / beta;
    wts /= z;
    const double num = v[x] - v[y];
    const double val = num / std::sqrt(smax);
    if (grad)
    {
      // d Gamma(v)(u) / d v = (1/m_u) sum over edges at u of w (v_u - v_nbr) for the endpoint terms.
      Vector dsmax = Vector::Zero(n);
      for (const Edge &e : ds.edges())
      {
        const double diff = v[e.v] - v[e.u];
        const double coef = e.w * diff * (wts[e.u] / m[e.u] + wts[e.v] / m[e.v]);
        dsmax[e.v] += coef;
        dsmax[e.u] -= coef;
      }
      Vector gr = -0.5 * num * std::pow(smax, -1.5) * dsmax;
      gr[x] += 1.0 / std::sqrt(smax);
      gr[y] -= 1.0 / std::sqrt(smax);
      *grad = gr;
    }
    return val;
  };
  for (int it = 0; it < iterations; ++it)
  {
    Vector grad;
    const double cur = smooth_objective(g, &grad);
    const double gn = grad.norm();
    if (!(gn > 0.0))
      break;
    Vector trial = g + (step / gn) * grad;
    normalize(trial);
    if (smooth_objective(trial, nullptr) > cur)
    {
      g = std::move(trial);
      best = std::max(best, ratio(g));
      step = std::min(1.0, step * 1.2);
    }
    else
    {
      step *= 0.5;
      if (step < 1e-12)
      {
        beta *= 2.0;
        step = 0.1;
        if (beta > 1e6)
          break;
      }
    }
  }
  out.lower = std::min(best, out.upper);
  return out;
}

// ---------------------------------------------------------------------------
// Tensorization and restriction

double density_entropy(const Vector &rho, const Vector &m)
{
  double s = 0.0;
  for (Index i = 0; i < rho.size(); ++i)
    if (rho[i] > 0.0)
      s += m[i] * rho[i] * std::log(rho[i]);
  return s;
}

CheckResult tensorization_check(const DirichletStructure &x, const DirichletStructure &y, const Vector &f,
                                const std::vector<double> &times)
{
  const ProductStructure prod = product_structure(x, y);
  return tensorization_check(x, y, prod.ds, f, times);
}

CheckResult tensorization_check(const DirichletStructure &x, const DirichletStructure &y,
                                const DirichletStructure &z, const Vector &f, const std::vector<double> &times)
{
  const ProductStructure ref = product_structure(x, y);
  if (z.size() != ref.ds.size() || (z.weights() - ref.ds.weights()).cwiseAbs().maxCoeff() > 1e-14 ||
      (z.measure() - ref.ds.measure()).cwiseAbs().maxCoeff() > 1e-14)
    throw Error("structure is not the Cartesian product of the given factors");
  const ProductMap map = ref.map;
  if (f.size() != map.size())
    throw Error("function does not live on the product");

  // Gamma additivity.
  const Vector gz = z.gamma(f);
  double gamma_residual = 0.0;
  for (Index a = 0; a < map.size(); ++a)
  {
    const auto [xa, ya] = map.split(a);
    Vector fy(map.nx), fx(map.ny);
    for (Index k = 0; k < map.nx; ++k)
      fy[k] = f[map.index(k, ya)];
    for (Index k = 0; k < map.ny; ++k)
      fx[k] = f[map.index(xa, k)];
    const double sum = x.gamma(fy)[xa] + y.gamma(fx)[ya];
    gamma_residual = std::max(gamma_residual, std::abs(gz[a] - sum));
  }

  // Kernel factorization H^Z = H^X (x) H^Y.
  const HeatOperator hx(x), hy(y), hz(z);
  double kernel_residual = 0.0;
  for (double t : times)
  {
    const Matrix kx = hx.matrix(t), ky = hy.matrix(t), kz = hz.matrix(t);
    for (Index a = 0; a < map.size(); ++a)
    {
      const auto [xa, ya] = map.split(a);
      for (Index b = 0; b < map.size(); ++b)
      {
        const auto [xb, yb] = map.split(b);
        kernel_residual = std::max(kernel_residual, std::abs(kz(a, b) - kx(xa, xb) * ky(ya, yb)));
      }
    }
  }

  // Entropy dissipation along the product flow from rho ~ exp(f).
  Vector rho0 = (f.array() - f.maxCoeff()).exp();
  rho0 /= ordered_dot(z.measure(), rho0);
  double dissipation_residual = 0.0;
  for (double t : times)
  {
    const double dt = 1e-3 * std::max(t, 1e-3);
    auto ent = [&](double s) { return density_entropy(hz.apply(rho0, s), z.measure()); };
    const double d1 = (ent(t + dt) - ent(t - dt)) / (2.0 * dt);
    const double d2 = (ent(t + dt / 2) - ent(t - dt / 2)) / dt;
    const double fd = (4.0 * d2 - d1) / 3.0;
    const Vector rho = hz.apply(rho0, t);
    const Vector logr = rho.array().log();
    const double fisher = ordered_dot(z.measure(), z.gamma(rho, logr));
    dissipation_residual = std::max(dissipation_residual, std::abs(-fd - fisher));
  }

  const double slack = std::max({gamma_residual / 1e-12, kernel_residual / 1e-10, dissipation_residual / 1e-8});
  CheckResult r = CheckResult::make("tensorization", "tensorization of the Cheeger energy and heat semigroup",
                                    slack, 1.0);
  r.set("gamma_residual", gamma_residual);
  r.set("gamma_tolerance", 1e-12);
  r.set("kernel_residual", kernel_residual);
  r.set("kernel_tolerance", 1e-10);
  r.set("dissipation_residual", dissipation_residual);
  r.set("dissipation_tolerance", 1e-8);
  r.set("slack_units", "max residual/tolerance ratio");
  return r;
}

CheckResult restriction_check(const GridSpace &grid, const DirichletStructure &ds, const RestrictedSpace &subset,
                              const Vector &f)
{
  const Index n = ds.size();
  if (f.size() != n)
    throw Error("function size does not match the grid");
  std::vector<bool> inside(n, false);
  for (Index i : subset.indices)
    inside[i] = true;
  const double h = grid.h();
  for (Index i = 0; i < n; ++i)
  {
    if (f[i] == 0.0)
      continue;
    for (Index j = 0; j < n; ++j)
      if (!inside[j] && ds.space().d(i, j) < 2.0 * h * (1.0 - 1e-12))
        throw Error("function support lies within 2h of the subset boundary (point " + std::to_string(i) + ")");
  }
  const DirichletStructure sub = restricted_structure(ds, subset.indices);
  const Index k = static_cast<Index>(subset.indices.size());
  Vector fy(k);
  for (Index p = 0; p < k; ++p)
    fy[p] = f[subset.indices[p]];
  const Vector gy = sub.gamma(fy);
  const Vector gfull = ds.gamma(f);
  const double scale = 1.0 + gfull.cwiseAbs().maxCoeff();
  double restricted = 0.0;
  for (Index p = 0; p < k; ++p)
    restricted = std::max(restricted, std::abs(gy[p] - gfull[subset.indices[p]]));

  // Zero extension of the restricted function.
  Vector ext = Vector::Zero(n);
  for (Index p = 0; p < k; ++p)
    ext[subset.indices[p]] = fy[p];
  const Vector gext = ds.gamma(ext);
  double extension = 0.0;
  Vector indicator_gamma = Vector::Zero(n);
  for (Index p = 0; p < k; ++p)
    indicator_gamma[subset.indices[p]] = gy[p];
  extension = (gext - indicator_gamma).cwiseAbs().maxCoeff();

  CheckResult r = CheckResult::make("restriction", "locality of Gamma under restriction to a convex subset",
                                    std::max(restricted, extension), 1e-14 * scale);
  r.set("restricted_residual", restricted);
  r.set("extension_residual", extension);
  r.set("subset_size", k);
  return r;
}

} // namespace ricci
