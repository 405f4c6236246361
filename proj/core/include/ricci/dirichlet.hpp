// Graph Dirichlet forms: Cheeger energy, Laplacian, carre du champ, heat semigroup,
// energy measures, intrinsic distance bounds and the product construction.

#ifndef RICCI_DIRICHLET_HPP
#define RICCI_DIRICHLET_HPP

#include <memory>
#include <vector>

#include <json.hpp>

#include "ricci/check.hpp"
#include "ricci/common.hpp"
#include "ricci/mmspace.hpp"

namespace ricci
{

struct Edge
{
  Index u = 0;
  Index v = 0;
  double w = 0.0;
};

/// Symmetric edge weights over a space with strictly positive masses.
/// Delta f(x) = (1/m_x) sum_y w_xy (f(y) - f(x)).
class DirichletStructure
{
public:
  DirichletStructure(MetricMeasureSpace space, Matrix weights);

  const MetricMeasureSpace &space() const { return *space_; }
  const Matrix &weights() const { return w_; }
  const Vector &measure() const { return space_->measure(); }
  Index size() const { return w_.rows(); }
  const std::vector<Edge> &edges() const { return edges_; }

  Vector laplacian(const Vector &f) const;
  /// Generator matrix M^{-1}(W - D).
  Matrix generator() const;

  /// E(f,g) = 1/2 sum_{x,y} w_xy (f(x)-f(y)) (g(x)-g(y)).
  double form(const Vector &f, const Vector &g) const;
  /// C(f) = E(f,f) / 2.
  double cheeger(const Vector &f) const;
  /// Gamma(f,g)(x) = (1/(2 m_x)) sum_y w_xy (f(y)-f(x)) (g(y)-g(x)).
  Vector gamma(const Vector &f, const Vector &g) const;
  Vector gamma(const Vector &f) const { return gamma(f, f); }

  nlohmann::json to_json() const;

private:
  std::shared_ptr<const MetricMeasureSpace> space_;
  Matrix w_;
  std::vector<Edge> edges_;
};

/// Finite-difference stencil weights w = (m_i + m_j) / (2 h^2) on a model grid.
DirichletStructure grid_structure(const GridSpace &grid);
/// Cycle with unit jump rates: the circle grid of length n with n points.
DirichletStructure cycle_structure(Index n);
/// Two points at distance 1 with masses (m0, 1 - m0) and a single edge of weight w.
DirichletStructure two_point_structure(double w = 1.0, double m0 = 0.5);
/// Weighted graph whose metric is the shortest path for edge lengths sqrt(2 min(m_u,m_v) / w_uv).
DirichletStructure graph_structure(const Matrix &weights, const Vector &measure);
/// Connected random graph: a ring plus random chords, weights in [0.5, 1.5], random masses.
DirichletStructure random_graph_structure(Index n, double chord_probability, std::uint64_t seed);

struct ProductStructure
{
  DirichletStructure ds;
  ProductMap map;
};

/// Cartesian product with w_Z = w_X m_Y [y = y'] + w_Y m_X [x = x'], so Delta_Z = Delta_X + Delta_Y.
ProductStructure product_structure(const DirichletStructure &x, const DirichletStructure &y);

/// Structure induced on a subset: w / m(Y) on inner edges and m / m(Y).
DirichletStructure restricted_structure(const DirichletStructure &ds, const std::vector<Index> &indices);

enum class HeatMode
{
  spectral,
  implicit_euler
};

inline constexpr Index kSpectralCap = 512;

/// Heat semigroup H_t = exp(t Delta).  Spectral mode diagonalizes the symmetrized generator
/// M^{-1/2}(W - D)M^{-1/2}; implicit-Euler mode solves (M - s(W - D)) u = M u_prev by CG and
/// Richardson-extrapolates the step.  Spectral requests above kSpectralCap fall back to Euler.
class HeatOperator
{
public:
  explicit HeatOperator(DirichletStructure ds, HeatMode mode = HeatMode::spectral, double euler_step = 1e-3);

  const DirichletStructure &structure() const { return ds_; }
  HeatMode mode() const { return mode_; }
  double euler_step() const { return step_; }

  Vector apply(const Vector &f, double t) const;
  /// Operator matrix of H_t, so that H_t f = matrix(t) * f.
  Matrix matrix(double t) const;

  /// Spectrum of -Delta in ascending order (spectral mode only).
  const Vector &eigenvalues() const;
  /// Orthonormal eigenvectors of the symmetrized generator.
  const Matrix &eigenvectors() const;
  /// Smallest nonzero eigenvalue of -Delta on a connected structure.
  double spectral_gap() const;

  nlohmann::json spectrum_json() const;

private:
  Vector euler_solve(const Vector &f, double t, Index steps) const;

  DirichletStructure ds_;
  HeatMode mode_;
  double step_;
  Vector sqrt_m_;
  Vector lambda_;
  Matrix basis_;
};

/// E(f, f phi) - E(f^2/2, phi); equals sum m phi Gamma(f).
double energy_measure(const DirichletStructure &ds, const Vector &f, const Vector &phi);

/// Convergence of (f^2 + H_t f^2 - 2 f H_t f) / (2t) to Gamma(f) as t decreases.
/// Passes when the observed order between consecutive times is within 0.2 of one.
CheckResult energy_measure_limit_check(const HeatOperator &ho, const Vector &f, const std::vector<double> &times);

/// |E(f, gh) - sum m (h Gamma(f,g) + g Gamma(f,h))|.
CheckResult leibnitz_check(const DirichletStructure &ds, const Vector &f, const Vector &g, const Vector &h,
                           double tol = 1e-10);

/// Integrated and pointwise parallelogram identities for C and Gamma.
CheckResult parallelogram_check(const DirichletStructure &ds, const Vector &f, const Vector &g, double tol = 1e-12);

struct IntrinsicBounds
{
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds on sup { g(x) - g(y) : max Gamma(g) <= 1 }.  The upper bound sums the single-edge
/// relaxations along a shortest path; the lower bound is the best feasible g found by ascent.
IntrinsicBounds intrinsic_distance_bounds(const DirichletStructure &ds, Index x, Index y, int iterations = 2000);

/// Gamma additivity, kernel factorization and the entropy dissipation identity on X x Y.
/// `f` lives on the product and seeds the dissipation test through rho ~ exp(f).
CheckResult tensorization_check(const DirichletStructure &x, const DirichletStructure &y, const Vector &f,
                                const std::vector<double> &times);
/// As above, but first verifies that `z` is the product structure of x and y.
CheckResult tensorization_check(const DirichletStructure &x, const DirichletStructure &y,
                                const DirichletStructure &z, const Vector &f, const std::vector<double> &times);

/// Gamma of a function supported at least 2h inside a convex subset is unchanged by restriction,
/// and the zero extension of the restricted function has Gamma equal to the indicator times Gamma_Y.
CheckResult restriction_check(const GridSpace &grid, const DirichletStructure &ds, const RestrictedSpace &subset,
                              const Vector &f);

/// sum_x m_x rho(x) log rho(x) for a positive density.
double density_entropy(const Vector &rho, const Vector &m);

} // namespace ricci

#endif
