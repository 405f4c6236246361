// Exact and entropic optimal transport on finite spaces, Kantorovich potentials,
// c-transforms, cyclical monotonicity scans and push-forward through plans.

#ifndef RICCI_TRANSPORT_HPP
#define RICCI_TRANSPORT_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "ricci/check.hpp"
#include "ricci/common.hpp"
#include "ricci/mmspace.hpp"

namespace ricci
{

/// Coupling of `source` and `target`; cost is sum gamma_xy d(x,y)^2.
struct TransportPlan
{
  Matrix gamma;
  Vector source;
  Vector target;
  double cost = 0.0;
};

/// phi(x) + phi_c(y) <= d(x,y)^2 / 2 everywhere, with equality on the optimal plan's support.
struct DualPotentials
{
  Vector phi;
  Vector phi_c;
};

/// Output of the dense transportation simplex for an arbitrary cost table.
struct LpSolution
{
  Matrix gamma;
  /// Basis duals indexed like the cost table; zero off the marginal supports.
  Vector u;
  Vector v;
  std::vector<Index> source_support;
  std::vector<Index> target_support;
  double objective = 0.0;
  double dual_objective = 0.0;
  /// A nonbasic cell has zero reduced cost, so the optimal plan may not be unique.
  bool alternative_optima = false;
  long pivots = 0;
  long degenerate_pivots = 0;
};

/// Exact min sum gamma_ij cost_ij over couplings of mu and nu.
/// Starts from the north-west corner basis, prices by Dantzig's rule and falls back to
/// Bland's rule after a run of degenerate pivots; leaving ties go to the smallest cell index.
LpSolution solve_transport_lp(const Matrix &cost, const Vector &mu, const Vector &nu);

struct ExactTransport
{
  TransportPlan plan;
  DualPotentials potentials;
  double w2 = 0.0;
  /// Primal minus dual objective for the cost d^2 / 2.
  double duality_gap = 0.0;
  bool alternative_optima = false;
};

/// Optimal W2 coupling.  Potentials are anchored by phi = 0 at the first support point of mu.
ExactTransport solve_w2_exact(const MetricMeasureSpace &space, const Vector &mu, const Vector &nu);

/// W1 for the cost d.
double w1(const MetricMeasureSpace &space, const Vector &mu, const Vector &nu);

struct EntropicOptions
{
  int max_iterations = 20000;
  double tolerance = 1e-9;
};

struct EntropicTransport
{
  /// Rounded onto the exact marginals.
  TransportPlan plan;
  /// Sup-norm marginal violation of the Sinkhorn iterate before rounding.
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Log-domain Sinkhorn for the cost d^2 with eps halved from the cost scale down to eps.
EntropicTransport solve_entropic(const MetricMeasureSpace &space, const Vector &mu, const Vector &nu, double eps,
                                 const EntropicOptions &options = {});

/// psi^c(x) = min_y d(x,y)^2 / 2 - psi(y).
Vector c_transform(const MetricMeasureSpace &space, const Vector &psi);

/// Worst sum c(x_i,y_i) - sum c(x_i,y_{i+1}) over cycles of plan support cells of
/// length 2..maxlen, with c = d^2 / 2.
CheckResult check_cyclical_monotonicity(const MetricMeasureSpace &space, const TransportPlan &plan, int maxlen,
                                        double tol = 1e-10);

/// gamma_# mu_tilde: sum over x of (mu_tilde / first marginal)(x) * gamma_xy.
Vector push_forward_plan(const TransportPlan &plan, const Vector &mu_tilde);

/// Throws unless v is a nonnegative vector of total mass one (within tol).
void require_probability(const Vector &v, const std::string &what, double tol = 1e-12);

std::string plan_to_csv(const TransportPlan &plan);
nlohmann::json plan_to_json(const TransportPlan &plan);
nlohmann::json potentials_to_json(const DualPotentials &potentials);

} // namespace ricci

#endif
