// Upper bounds on the transport distance D between two metric measure spaces, and the
// refinement-stability experiment built on them.

#ifndef RICCI_MMDIST_HPP
#define RICCI_MMDIST_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ricci/check.hpp"
#include "ricci/common.hpp"
#include "ricci/mmspace.hpp"

namespace ricci
{

/// Worst violation of the mixed triangle inequalities for a bridge b between X and Y
/// (including b >= 0); zero means b extends d_X and d_Y to a pseudo-distance on X + Y.
double bridge_violation(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Matrix &b);

/// Feasible bridge close to b: shortest-path closure on X + Y, then a uniform upward shift
/// large enough to restore d_X and d_Y.
Matrix repair_bridge(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Matrix &b);

/// Bridge seeded from a coupling: b(x, y) = min over supp gamma of d_X(x, x') + d_Y(y', y),
/// then repaired.
Matrix seed_bridge(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Matrix &gamma);

struct DistanceOptions
{
  int rounds = 8;
  int restarts = 3;
  std::uint64_t seed = 1;
  /// Primal movement per sweep below which the QP stops.
  double qp_tolerance = 1e-8;
  int qp_max_sweeps = 200;
  int threads = 1;
};

struct DistanceBound
{
  /// sqrt(sum gamma b^2) for the returned pair.
  double upper = kInf;
  Matrix coupling;
  Matrix bridge;
  /// Objective sum gamma b^2 after each half-step of the winning run.
  std::vector<double> history;
  /// False when the last round still changed the objective.
  bool converged = false;
  int winning_start = 0;
  double max_qp_residual = 0.0;

  nlohmann::json to_json() const;
};

/// Alternates exact transport for the cost b^2 with a QP over bridges.  An empty `init` starts
/// from the eccentricity-sorted coupling plus `restarts` random orderings; the best run wins.
DistanceBound d_upper_bound(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Matrix &init = {},
                            const DistanceOptions &options = {});

/// Coupling of a circle grid with n points into its refinement with 2n points:
/// point i goes half to 2i and half to 2i + 1.
Matrix even_index_embedding(Index n);

struct StabilityReport
{
  std::vector<Index> sizes;
  /// Slack of each named check at each size.
  std::vector<std::string> check_names;
  std::vector<std::vector<double>> slacks;
  std::vector<std::vector<bool>> passes;
  /// Bound between consecutive refinements (one fewer entry than sizes).
  std::vector<double> distance_bounds;
  bool slack_nonincreasing = true;
  bool distance_decreasing = true;
  CheckResult summary;

  nlohmann::json to_json() const;
};

/// Runs `battery` on each refinement, bounds D between neighbours, and checks that every slack
/// is nonincreasing in n (within 1e-9) and that the distance bounds decrease.
StabilityReport stability_experiment(const std::vector<GridSpace> &family,
                                     const std::function<std::vector<CheckResult>(const GridSpace &)> &battery,
                                     const DistanceOptions &options = {});

} // namespace ricci

#endif
