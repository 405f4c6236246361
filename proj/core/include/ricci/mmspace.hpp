// Finite metric measure spaces, grid discretizations of model spaces,
// Pythagorean products, convex restrictions and exponential reweighting.

#ifndef RICCI_MMSPACE_HPP
#define RICCI_MMSPACE_HPP

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ricci/common.hpp"

namespace ricci
{

/// Finite point set with a dense distance table and probability weights.
/// The table is taken as given; validate_space() reports whether the axioms hold.
class MetricMeasureSpace
{
public:
  MetricMeasureSpace() = default;
  MetricMeasureSpace(Matrix distances, Vector measure, std::vector<std::string> labels = {});

  Index size() const { return m_.size(); }
  const Matrix &distances() const { return d_; }
  const Vector &measure() const { return m_; }
  double d(Index i, Index j) const { return d_(i, j); }
  double mass(Index i) const { return m_[i]; }
  const std::vector<std::string> &labels() const { return labels_; }

  /// Points with strictly positive mass, in index order.
  std::vector<Index> support() const;
  double diameter() const;

private:
  Matrix d_;
  Vector m_;
  std::vector<std::string> labels_;
};

struct ValidationResult
{
  double triangle_violation = 0.0;
  std::array<Index, 3> worst_triple{-1, -1, -1};
  double asymmetry = 0.0;
  double negativity = 0.0; // max of -d(x,y) and |d(x,x)|
  double mass_defect = 0.0;
  double negative_mass = 0.0;
  double tolerance = 1e-12;
  bool pass = true;
};

/// Exhaustive O(n^3) scan reporting the worst triangle violation and its triple.
ValidationResult validate_space(const MetricMeasureSpace &space, double tol = 1e-12);

enum class ModelKind
{
  none,
  interval,
  circle,
  torus
};

std::string to_string(ModelKind kind);

struct ModelPoint
{
  double x = 0.0;
  double y = 0.0;
};

/// A metric measure space sampled from a model continuum (interval, circle, flat torus)
/// whose geodesics are known in closed form.  ModelKind::none wraps an arbitrary space
/// with h = 0, which lets grid-oriented verifiers run on abstract spaces.
class GridSpace
{
public:
  GridSpace() = default;
  static GridSpace wrap(MetricMeasureSpace space);

  const MetricMeasureSpace &space() const { return space_; }
  ModelKind model() const { return model_; }
  bool has_model() const { return model_ != ModelKind::none; }
  double h() const { return h_; }
  double length() const { return length_[0]; }
  double length2() const { return length_[1]; }
  Index n1() const { return n_[0]; }
  Index n2() const { return n_[1]; }
  Index size() const { return space_.size(); }

  ModelPoint coordinate(Index i) const;
  double model_distance(const ModelPoint &a, const ModelPoint &b) const;

  /// Point at time t on the constant-speed model geodesic from grid point `from` to `to`.
  /// Antipodal circle pairs follow the positive orientation.
  ModelPoint geodesic_point(Index from, Index to, double t) const;
  /// Nearest grid point; exact half-way ties round toward the positive orientation.
  Index nearest(const ModelPoint &p) const;

  /// Grid neighbours used by the finite-difference Dirichlet stencil, with the
  /// squared spacing of the connecting axis.
  std::vector<std::pair<Index, double>> stencil(Index i) const;

  nlohmann::json model_json() const;

private:
  friend GridSpace build_circle_grid(double, Index);
  friend GridSpace build_interval_grid(double, Index);
  friend GridSpace build_torus_grid(double, double, Index, Index);

  double axis_position(int axis, double index_units) const;
  std::array<double, 2> signed_steps(Index from, Index to) const;

  MetricMeasureSpace space_;
  ModelKind model_ = ModelKind::none;
  double h_ = 0.0;
  std::array<double, 2> length_{0.0, 0.0};
  std::array<double, 2> spacing_{0.0, 0.0};
  std::array<Index, 2> n_{0, 1};
};

GridSpace build_circle_grid(double length, Index n);
GridSpace build_interval_grid(double length, Index n);
GridSpace build_torus_grid(double length1, double length2, Index n1, Index n2);
MetricMeasureSpace build_two_point(double d01, double m0);
MetricMeasureSpace build_one_point();

/// Index bijection (x, y) <-> z = x * ny + y for product spaces.
struct ProductMap
{
  Index nx = 0;
  Index ny = 0;

  Index index(Index x, Index y) const { return x * ny + y; }
  std::pair<Index, Index> split(Index z) const { return {z / ny, z % ny}; }
  Index size() const { return nx * ny; }
};

struct ProductSpace
{
  MetricMeasureSpace space;
  ProductMap map;
};

inline constexpr Index kDefaultProductCap = 1 << 16;

/// d_Z^2 = d_X^2 + d_Y^2 (squares summed before one square root), m_Z = m_X (x) m_Y.
ProductSpace product_space(const MetricMeasureSpace &x, const MetricMeasureSpace &y,
                           Index cap = kDefaultProductCap);

struct RestrictedSpace
{
  MetricMeasureSpace space;
  /// Index in the parent grid of each restricted point.
  std::vector<Index> indices;
};

/// Restriction to the selected grid points.  The selection must be convex in the
/// operational sense that every model geodesic between selected points stays within
/// tol_factor * h of the selection; otherwise Error names the offending pair.
RestrictedSpace restrict_convex(const GridSpace &grid, const std::function<bool(const ModelPoint &)> &predicate,
                                double tol_factor = 1.5);
RestrictedSpace restrict_convex_indices(const GridSpace &grid, const std::vector<bool> &selected,
                                        double tol_factor = 1.5);

/// m' proportional to exp(-V) m, renormalized.
MetricMeasureSpace reweight(const MetricMeasureSpace &space, const Vector &potential);
MetricMeasureSpace reweight(const GridSpace &grid, const std::function<double(const ModelPoint &)> &potential);

nlohmann::json space_to_json(const MetricMeasureSpace &space);
nlohmann::json grid_to_json(const GridSpace &grid);
/// Parses the space file format; when a `model` block is present the grid is rebuilt
/// from it and checked against the stored table.
GridSpace grid_from_json(const nlohmann::json &j);
MetricMeasureSpace space_from_json(const nlohmann::json &j);

} // namespace ricci

#endif
