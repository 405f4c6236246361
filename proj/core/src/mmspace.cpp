#include "ricci/mmspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ricci
{

MetricMeasureSpace::MetricMeasureSpace(Matrix distances, Vector measure, std::vector<std::string> labels)
    : d_(std::move(distances)), m_(std::move(measure)), labels_(std::move(labels))
{
  if (d_.rows() != d_.cols())
    throw Error("distance table must be square");
  if (d_.rows() != m_.size())
    throw Error("distance table and measure sizes differ");
  if (m_.size() == 0)
    throw Error("a metric measure space needs at least one point");
  if (!labels_.empty() && static_cast<Index>(labels_.size()) != m_.size())
    throw Error("label count must match point count");
  if (!d_.allFinite() || !m_.allFinite())
    throw Error("distances and masses must be finite");
}

std::vector<Index> MetricMeasureSpace::support() const
{
  std::vector<Index> s;
  for (Index i = 0; i < m_.size(); ++i)
    if (m_[i] > 0.0)
      s.push_back(i);
  return s;
}

double MetricMeasureSpace::diameter() const { return d_.maxCoeff(); }

ValidationResult validate_space(const MetricMeasureSpace &space, double tol)
{
  ValidationResult r;
  r.tolerance = tol;
  const Matrix &d = space.distances();
  const Index n = space.size();
  for (Index i = 0; i < n; ++i)
  {
    r.negativity = std::max(r.negativity, std::abs(d(i, i)));
    for (Index j = 0; j < n; ++j)
    {
      r.asymmetry = std::max(r.asymmetry, std::abs(d(i, j) - d(j, i)));
      r.negativity = std::max(r.negativity, -d(i, j));
    }
  }
  for (Index x = 0; x < n; ++x)
  {
    for (Index z = x + 1; z < n; ++z)
    {
      Index best_y = 0;
      const double through = (d.col(x) + d.col(z)).minCoeff(&best_y);
      const double violation = d(x, z) - through;
      if (violation > r.triangle_violation)
      {
        r.triangle_violation = violation;
        r.worst_triple = {x, best_y, z};
      }
    }
  }
  const Vector &m = space.measure();
  r.negative_mass = std::max(0.0, -m.minCoeff());
  r.mass_defect = std::abs(ordered_sum(m) - 1.0);
  r.pass = r.triangle_violation <= tol && r.asymmetry <= tol && r.negativity <= tol && r.mass_defect <= tol &&
           r.negative_mass == 0.0;
  return r;
}

std::string to_string(ModelKind kind)
{
  switch (kind)
  {
  case ModelKind::interval:
    return "interval";
  case ModelKind::circle:
    return "circle";
  case ModelKind::torus:
    return "torus";
  default:
    return "none";
  }
}

// ---------------------------------------------------------------------------
// GridSpace

GridSpace GridSpace::wrap(MetricMeasureSpace space)
{
  GridSpace g;
  g.n_ = {space.size(), 1};
  g.space_ = std::move(space);
  return g;
}

namespace
{

Index circle_steps(Index i, Index j, Index n)
{
  const Index k = std::abs(i - j);
  return std::min(k, n - k);
}

Matrix grid_distances(ModelKind kind, const std::array<Index, 2> &n, const std::array<double, 2> &spacing)
{
  const Index total = n[0] * n[1];
  Matrix d(total, total);
  for (Index a = 0; a < total; ++a)
  {
    for (Index b = 0; b < total; ++b)
    {
      if (kind == ModelKind::interval)
      {
        d(a, b) = static_cast<double>(std::abs(a - b)) * spacing[0];
      }
      else if (kind == ModelKind::circle)
      {
        d(a, b) = static_cast<double>(circle_steps(a, b, n[0])) * spacing[0];
      }
      else
      {
        const double u = static_cast<double>(circle_steps(a / n[1], b / n[1], n[0])) * spacing[0];
        const double v = static_cast<double>(circle_steps(a % n[1], b % n[1], n[1])) * spacing[1];
        d(a, b) = std::sqrt(u * u + v * v);
      }
    }
  }
  return d;
}

double circle_gap(double s, double t, double length)
{
  double delta = std::fmod(std::abs(s - t), length);
  return std::min(delta, length - delta);
}

} // namespace

GridSpace build_circle_grid(double length, Index n)
{
  if (n < 2)
    throw Error("circle grid needs n >= 2");
  if (!(length > 0.0))
    throw Error("circle length must be positive");
  GridSpace g;
  g.model_ = ModelKind::circle;
  g.n_ = {n, 1};
  g.length_ = {length, 0.0};
  g.spacing_ = {length / static_cast<double>(n), 0.0};
  g.h_ = g.spacing_[0];
  g.space_ = MetricMeasureSpace(grid_distances(g.model_, g.n_, g.spacing_),
                                Vector::Constant(n, 1.0 / static_cast<double>(n)));
  return g;
}

GridSpace build_interval_grid(double length, Index n)
{
  if (n < 2)
    throw Error("interval grid needs n >= 2");
  if (!(length > 0.0))
    throw Error("interval length must be positive");
  GridSpace g;
  g.model_ = ModelKind::interval;
  g.n_ = {n, 1};
  g.length_ = {length, 0.0};
  g.spacing_ = {length / static_cast<double>(n - 1), 0.0};
  g.h_ = g.spacing_[0];
  g.space_ = MetricMeasureSpace(grid_distances(g.model_, g.n_, g.spacing_),
                                Vector::Constant(n, 1.0 / static_cast<double>(n)));
  return g;
}

GridSpace build_torus_grid(double length1, double length2, Index n1, Index n2)
{
  if (n1 < 2 || n2 < 2)
    throw Error("torus grid needs n1, n2 >= 2");
  if (!(length1 > 0.0) || !(length2 > 0.0))
    throw Error("torus side lengths must be positive");
  GridSpace g;
  g.model_ = ModelKind::torus;
  g.n_ = {n1, n2};
  g.length_ = {length1, length2};
  g.spacing_ = {length1 / static_cast<double>(n1), length2 / static_cast<double>(n2)};
  g.h_ = std::max(g.spacing_[0], g.spacing_[1]);
  g.space_ = MetricMeasureSpace(grid_distances(g.model_, g.n_, g.spacing_),
                                Vector::Constant(n1 * n2, 1.0 / static_cast<double>(n1 * n2)));
  return g;
}

MetricMeasureSpace build_two_point(double d01, double m0)
{
  if (!(d01 > 0.0) || !std::isfinite(d01))
    throw Error("two-point distance must be positive");
  if (!(m0 > 0.0 && m0 < 1.0))
    throw Error("two-point mass must lie in (0, 1)");
  Matrix d(2, 2);
  d << 0.0, d01, d01, 0.0;
  Vector m(2);
  m << m0, 1.0 - m0;
  return MetricMeasureSpace(std::move(d), std::move(m), {"a", "b"});
}

MetricMeasureSpace build_one_point() { return MetricMeasureSpace(Matrix::Zero(1, 1), Vector::Ones(1)); }

ModelPoint GridSpace::coordinate(Index i) const
{
  switch (model_)
  {
  case ModelKind::interval:
  case ModelKind::circle:
    return {static_cast<double>(i) * spacing_[0], 0.0};
  case ModelKind::torus:
    return {static_cast<double>(i / n_[1]) * spacing_[0], static_cast<double>(i % n_[1]) * spacing_[1]};
  default:
    return {static_cast<double>(i), 0.0};
  }
}

double GridSpace::model_distance(const ModelPoint &a, const ModelPoint &b) const
{
  switch (model_)
  {
  case ModelKind::interval:
    return std::abs(a.x - b.x);
  case ModelKind::circle:
    return circle_gap(a.x, b.x, length_[0]);
  case ModelKind::torus:
  {
    const double u = circle_gap(a.x, b.x, length_[0]);
    const double v = circle_gap(a.y, b.y, length_[1]);
    return std::sqrt(u * u + v * v);
  }
  default:
    throw Error("model distance requested on a space without a model");
  }
}

std::array<double, 2> GridSpace::signed_steps(Index from, Index to) const
{
  auto periodic = [](Index a, Index b, Index n) {
    Index k = ((b - a) % n + n) % n;
    // antipodal ties (2k == n) keep the positive orientation
    return static_cast<double>(2 * k <= n ? k : k - n);
  };
  switch (model_)
  {
  case ModelKind::interval:
    return {static_cast<double>(to - from), 0.0};
  case ModelKind::circle:
    return {periodic(from, to, n_[0]), 0.0};
  case ModelKind::torus:
    return {periodic(from / n_[1], to / n_[1], n_[0]), periodic(from % n_[1], to % n_[1], n_[1])};
  default:
    throw Error("geodesics are only known on model grids");
  }
}

ModelPoint GridSpace::geodesic_point(Index from, Index to, double t) const
{
  const auto steps = signed_steps(from, to);
  if (model_ == ModelKind::torus)
  {
    const double u = static_cast<double>(from / n_[1]) + t * steps[0];
    const double v = static_cast<double>(from % n_[1]) + t * steps[1];
    return {axis_position(0, u), axis_position(1, v)};
  }
  return {axis_position(0, static_cast<double>(from) + t * steps[0]), 0.0};
}

double GridSpace::axis_position(int axis, double index_units) const
{
  double p = index_units * spacing_[axis];
  if (model_ == ModelKind::circle || model_ == ModelKind::torus)
  {
    p = std::fmod(p, length_[axis]);
    if (p < 0.0)
      p += length_[axis];
  }
  return p;
}

Index GridSpace::nearest(const ModelPoint &p) const
{
  // Index units with a small bias so computed half-way points round up consistently.
  auto round_axis = [&](double coord, int axis, Index n, bool periodic) {
    const double u = coord / spacing_[axis];
    Index k = static_cast<Index>(std::floor(u + 0.5 + 1e-9));
    if (periodic)
      k = ((k % n) + n) % n;
    else
      k = std::clamp<Index>(k, 0, n - 1);
    return k;
  };
  switch (model_)
  {
  case ModelKind::interval:
    return round_axis(p.x, 0, n_[0], false);
  case ModelKind::circle:
    return round_axis(p.x, 0, n_[0], true);
  case ModelKind::torus:
    return round_axis(p.x, 0, n_[0], true) * n_[1] + round_axis(p.y, 1, n_[1], true);
  default:
    throw Error("nearest grid point requested on a space without a model");
  }
}

std::vector<std::pair<Index, double>> GridSpace::stencil(Index i) const
{
  std::vector<std::pair<Index, double>> out;
  switch (model_)
  {
  case ModelKind::interval:
    if (i > 0)
      out.emplace_back(i - 1, spacing_[0] * spacing_[0]);
    if (i + 1 < n_[0])
      out.emplace_back(i + 1, spacing_[0] * spacing_[0]);
    break;
  case ModelKind::circle:
    out.emplace_back((i + n_[0] - 1) % n_[0], spacing_[0] * spacing_[0]);
    out.emplace_back((i + 1) % n_[0], spacing_[0] * spacing_[0]);
    break;
  case ModelKind::torus:
  {
    const Index a = i / n_[1];
    const Index b = i % n_[1];
    out.emplace_back(((a + n_[0] - 1) % n_[0]) * n_[1] + b, spacing_[0] * spacing_[0]);
    out.emplace_back(((a + 1) % n_[0]) * n_[1] + b, spacing_[0] * spacing_[0]);
    out.emplace_back(a * n_[1] + (b + n_[1] - 1) % n_[1], spacing_[1] * spacing_[1]);
    out.emplace_back(a * n_[1] + (b + 1) % n_[1], spacing_[1] * spacing_[1]);
    break;
  }
  default:
    throw Error("finite-difference stencil requested on a space without a model");
  }
  return out;
}

nlohmann::json GridSpace::model_json() const
{
  nlohmann::json j;
  j["kind"] = to_string(model_);
  switch (model_)
  {
  case ModelKind::interval:
  case ModelKind::circle:
    j["length"] = length_[0];
    j["n"] = n_[0];
    break;
  case ModelKind::torus:
    j["length"] = {length_[0], length_[1]};
    j["n"] = {n_[0], n_[1]};
    break;
  default:
    break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Products, restrictions, reweighting

ProductSpace product_space(const MetricMeasureSpace &x, const MetricMeasureSpace &y, Index cap)
{
  const Index nx = x.size();
  const Index ny = y.size();
  if (nx > cap / std::max<Index>(ny, 1))
    throw Error("product space of size " + std::to_string(nx) + "x" + std::to_string(ny) + " exceeds cap " +
                std::to_string(cap));
  if (!validate_space(x).pass || !validate_space(y).pass)
    throw Error("product factors must be valid metric measure spaces");
  ProductMap map{nx, ny};
  const Index n = map.size();
  Matrix d(n, n);
  Vector m(n);
  for (Index a = 0; a < n; ++a)
  {
    const auto [xa, ya] = map.split(a);
    m[a] = x.mass(xa) * y.mass(ya);
    for (Index b = 0; b < n; ++b)
    {
      const auto [xb, yb] = map.split(b);
      const double u = x.d(xa, xb);
      const double v = y.d(ya, yb);
      d(a, b) = std::sqrt(u * u + v * v);
    }
  }
  return {MetricMeasureSpace(std::move(d), std::move(m)), map};
}

RestrictedSpace restrict_convex_indices(const GridSpace &grid, const std::vector<bool> &selected, double tol_factor)
{
  if (!grid.has_model())
    throw Error("convex restriction needs a model grid");
  const Index n = grid.size();
  if (static_cast<Index>(selected.size()) != n)
    throw Error("selection size does not match the grid");
  std::vector<Index> idx;
  for (Index i = 0; i < n; ++i)
    if (selected[i])
      idx.push_back(i);
  if (idx.empty())
    throw Error("convex restriction selected no points");

  const double tol = tol_factor * grid.h();
  auto distance_to_selection = [&](const ModelPoint &p) {
    const Index k = grid.nearest(p);
    if (selected[k])
      return grid.model_distance(p, grid.coordinate(k));
    double best = kInf;
    for (Index s : idx)
      best = std::min(best, grid.model_distance(p, grid.coordinate(s)));
    return best;
  };
  auto geodesic_stays = [&](Index a, Index b) {
    const double len = grid.space().d(a, b);
    const int samples = static_cast<int>(std::ceil(2.0 * len / grid.h())) + 1;
    for (int k = 0; k <= samples; ++k)
    {
      const double t = static_cast<double>(k) / samples;
      if (distance_to_selection(grid.geodesic_point(a, b, t)) > tol)
        return false;
    }
    return true;
  };

  for (std::size_t p = 0; p < idx.size(); ++p)
  {
    for (std::size_t q = p + 1; q < idx.size(); ++q)
    {
      const Index a = idx[p];
      const Index b = idx[q];
      // an antipodal pair on a circle has two geodesics; one staying inside suffices
      if (!geodesic_stays(a, b) && !geodesic_stays(b, a))
      {
        std::ostringstream msg;
        msg << "selection is not convex: geodesic between grid points " << a << " and " << b
            << " leaves the set by more than " << tol;
        throw Error(msg.str());
      }
    }
  }

  const Index k = static_cast<Index>(idx.size());
  Matrix d(k, k);
  Vector m(k);
  for (Index p = 0; p < k; ++p)
  {
    m[p] = grid.space().mass(idx[p]);
    for (Index q = 0; q < k; ++q)
      d(p, q) = grid.space().d(idx[p], idx[q]);
  }
  const double total = ordered_sum(m);
  if (!(total > 0.0))
    throw Error("convex restriction has zero mass");
  m /= total;
  return {MetricMeasureSpace(std::move(d), std::move(m)), std::move(idx)};
}

RestrictedSpace restrict_convex(const GridSpace &grid, const std::function<bool(const ModelPoint &)> &predicate,
                                double tol_factor)
{
  std::vector<bool> selected(grid.size());
  for (Index i = 0; i < grid.size(); ++i)
    selected[i] = predicate(grid.coordinate(i));
  return restrict_convex_indices(grid, selected, tol_factor);
}

MetricMeasureSpace reweight(const MetricMeasureSpace &space, const Vector &potential)
{
  if (potential.size() != space.size())
    throw Error("potential size does not match the space");
  double vmin = kInf;
  for (Index i = 0; i < space.size(); ++i)
  {
    if (space.mass(i) > 0.0)
    {
      if (!std::isfinite(potential[i]))
        throw Error("potential must be finite on the support");
      vmin = std::min(vmin, potential[i]);
    }
  }
  Vector m = Vector::Zero(space.size());
  for (Index i = 0; i < space.size(); ++i)
    if (space.mass(i) > 0.0)
      m[i] = std::exp(-(potential[i] - vmin)) * space.mass(i);
  const double total = ordered_sum(m);
  if (!(total > 0.0))
    throw Error("reweighted measure has zero mass");
  m /= total;
  return MetricMeasureSpace(space.distances(), std::move(m), space.labels());
}

MetricMeasureSpace reweight(const GridSpace &grid, const std::function<double(const ModelPoint &)> &potential)
{
  Vector v(grid.size());
  for (Index i = 0; i < grid.size(); ++i)
    v[i] = potential(grid.coordinate(i));
  return reweight(grid.space(), v);
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json space_to_json(const MetricMeasureSpace &space)
{
  nlohmann::json j;
  j["version"] = kSchemaVersion;
  j["n"] = space.size();
  nlohmann::json d = nlohmann::json::array();
  for (Index i = 0; i < space.size(); ++i)
  {
    nlohmann::json row = nlohmann::json::array();
    for (Index k = 0; k < space.size(); ++k)
      row.push_back(space.d(i, k));
    d.push_back(std::move(row));
  }
  j["d"] = std::move(d);
  nlohmann::json m = nlohmann::json::array();
  for (Index i = 0; i < space.size(); ++i)
    m.push_back(space.mass(i));
  j["m"] = std::move(m);
  if (!space.labels().empty())
    j["labels"] = space.labels();
  return j;
}

nlohmann::json grid_to_json(const GridSpace &grid)
{
  nlohmann::json j = space_to_json(grid.space());
  if (grid.has_model())
    j["model"] = grid.model_json();
  return j;
}

MetricMeasureSpace space_from_json(const nlohmann::json &j)
{
  static const std::vector<std::string> allowed{"version", "n", "d", "m", "labels", "model"};
  for (const auto &item : j.items())
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw Error("unknown key in space file: " + item.key());
  if (j.value("version", std::string()) != kSchemaVersion)
    throw Error("space file version must be " + std::string(kSchemaVersion));
  const Index n = j.at("n").get<Index>();
  const auto &dj = j.at("d");
  const auto &mj = j.at("m");
  if (static_cast<Index>(dj.size()) != n || static_cast<Index>(mj.size()) != n)
    throw Error("space file sizes disagree with n");
  Matrix d(n, n);
  Vector m(n);
  for (Index i = 0; i < n; ++i)
  {
    if (static_cast<Index>(dj[i].size()) != n)
      throw Error("distance row " + std::to_string(i) + " has wrong length");
    for (Index k = 0; k < n; ++k)
      d(i, k) = dj[i][k].get<double>();
    m[i] = mj[i].get<double>();
  }
  std::vector<std::string> labels;
  if (j.contains("labels"))
    labels = j.at("labels").get<std::vector<std::string>>();
  return MetricMeasureSpace(std::move(d), std::move(m), std::move(labels));
}

GridSpace grid_from_json(const nlohmann::json &j)
{
  MetricMeasureSpace space = space_from_json(j);
  if (!j.contains("model"))
    return GridSpace::wrap(std::move(space));
  const auto &model = j.at("model");
  const std::string kind = model.at("kind").get<std::string>();
  GridSpace grid;
  if (kind == "circle")
    grid = build_circle_grid(model.at("length").get<double>(), model.at("n").get<Index>());
  else if (kind == "interval")
    grid = build_interval_grid(model.at("length").get<double>(), model.at("n").get<Index>());
  else if (kind == "torus")
    grid = build_torus_grid(model.at("length")[0].get<double>(), model.at("length")[1].get<double>(),
                            model.at("n")[0].get<Index>(), model.at("n")[1].get<Index>());
  else if (kind == "none")
    return GridSpace::wrap(std::move(space));
  else
    throw Error("unknown model kind: " + kind);
  if (grid.size() != space.size() || (grid.space().distances() - space.distances()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error("stored distance table disagrees with its model block");
  if ((grid.space().measure() - space.measure()).cwiseAbs().maxCoeff() > 1e-12)
    return GridSpace::wrap(std::move(space));
  return grid;
}

} // namespace ricci
