// Relative entropy, Fisher information, rounded displacement interpolation on model grids
// and the entropy-convexity verifiers built on it.

#ifndef RICCI_ENTROPY_GEO_HPP
#define RICCI_ENTROPY_GEO_HPP

#include <string>
#include <vector>

#include "ricci/check.hpp"
#include "ricci/common.hpp"
#include "ricci/dirichlet.hpp"
#include "ricci/mmspace.hpp"
#include "ricci/transport.hpp"

namespace ricci
{

/// Ent(mu | m) = sum mu log(mu / m); +infinity when mu charges an m-null point.
double relative_entropy(const Vector &mu, const Vector &m);

/// 4 C(sqrt(rho)) for a density rho with respect to the structure's measure.
double fisher_information(const DirichletStructure &ds, const Vector &rho);

/// Converts between measures (masses) and densities with respect to m.
Vector density_of(const Vector &mu, const Vector &m);
Vector measure_of(const Vector &rho, const Vector &m);

struct GeodesicPath
{
  double weight = 0.0;
  /// Grid points at times k / T, k = 0..T.
  std::vector<Index> points;
  /// Largest model distance between a sampled geodesic point and its rounding.
  double rounding = 0.0;
};

struct GeodesicPlan
{
  std::vector<GeodesicPath> paths;
  Index steps = 1;
  Vector mu0;
  Vector mu1;
  /// Squared W2 distance of the endpoints (exact LP).
  double w2_squared = 0.0;
  double rounding = 0.0;
  bool alternative_optima = false;

  double time(Index k) const { return static_cast<double>(k) / static_cast<double>(steps); }
  /// (e_k)_# pi, optionally reweighted by per-path factors F.
  Vector marginal(Index k, Index size, const std::vector<double> *factors = nullptr) const;
};

/// Samples each support pair of the exact optimal plan along its model geodesic and rounds
/// to grid points.  Spaces without a model are accepted only for T = 1.
GeodesicPlan displacement_interpolation(const GridSpace &grid, const Vector &mu0, const Vector &mu1, Index steps);

/// C_tol h (1 + |log rho0|_inf + |log rho1|_inf), with log norms over the density supports.
double cd_budget(const GridSpace &grid, const Vector &mu0, const Vector &mu1, double c_tol);

inline constexpr double kDefaultCTol = 8.0;

/// max over grid times of [Ent(mu_t) - (1-t)Ent(mu_0) - t Ent(mu_1) + (K/2) t(1-t) W2^2]^+.
CheckResult cd_convexity_check(const GridSpace &grid, const Vector &mu0, const Vector &mu1, double K, Index steps,
                               double c_tol = kDefaultCTol);
/// The same functional along the plan reweighted by F (with sum F_i weight_i = 1).
CheckResult strong_cd_weighted_check(const GridSpace &grid, const GeodesicPlan &plan, const std::vector<double> &F,
                                     double K, double c_tol = kDefaultCTol);
/// |rho_t|_inf <= exp(K^- t(1-t) S^2 / 2) |rho_0|_inf^(1-t) |rho_1|_inf^t up to a factor 1 + c h.
CheckResult interpolation_bound_check(const GridSpace &grid, const GeodesicPlan &plan, double K,
                                      double c = kDefaultCTol);

struct BrenierThresholds
{
  /// Per source point x the spread may reach h (spread_factor + e) and the slope mismatch
  /// h (slope_factor + (1 + e) / 2), where e is the largest density ratio rho0(x) / rho1(y)
  /// over the targets y of x.
  double spread_factor = 2.0;
  double slope_factor = 2.0;
};

/// Per source point: spread of transport distances and the mismatch between the mean
/// transport distance and the local slope of the Kantorovich potential.
CheckResult metric_brenier_check(const GridSpace &grid, const Vector &mu0, const Vector &mu1,
                                 const BrenierThresholds &thresholds = {});

/// Rows (t, point_index, mass) for every grid time.
std::string interpolation_to_csv(const GeodesicPlan &plan, Index size);

} // namespace ricci

#endif
