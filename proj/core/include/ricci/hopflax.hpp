// Exact Hopf-Lax semigroup on a finite metric space and the distance functionals D+ and D-.

#ifndef RICCI_HOPFLAX_HPP
#define RICCI_HOPFLAX_HPP

#include <string>
#include <vector>

#include "ricci/check.hpp"
#include "ricci/common.hpp"
#include "ricci/mmspace.hpp"

namespace ricci
{

struct HopfLaxState
{
  Vector g;
  double t = 0.0;
  /// Q_t g(x) = min_y g(y) + d(x, y)^2 / (2t).
  Vector values;
  /// Every minimizer of each row; values within 1e-13 relative of the minimum count as ties.
  std::vector<std::vector<Index>> argmin;
};

HopfLaxState hopf_lax(const MetricMeasureSpace &space, const Vector &g, double t);

struct DistanceFunctionals
{
  /// Largest distance from x to a minimizer.
  Vector plus;
  /// Smallest distance from x to a minimizer.
  Vector minus;
};

DistanceFunctionals dplus_dminus(const MetricMeasureSpace &space, const HopfLaxState &state);

/// Right difference quotient of Q_t g against -D+^2 / (2t^2).  Tolerance c1 * dt with
/// c1 = diam^2 / (2t^3).  Points whose D+ minimizer is no longer optimal at t + dt sit at an
/// argmin switch; they are excluded and counted in the context.
CheckResult hj_identity_check(const MetricMeasureSpace &space, const Vector &g, double t, double dt);

/// On Z = X x Y: (a) Q_t g equals the iterated one-variable Hopf-Lax transform; (b) the right
/// difference quotient plus (D-_X^2 + D-_Y^2) / (2t^2) stays below c1 * dt away from switches.
/// The discrete-slope form of (b) is reported but not asserted.
CheckResult product_hj_check(const MetricMeasureSpace &x, const MetricMeasureSpace &y, const Vector &g, double t,
                             double dt);

/// Columns x, value, Dplus, Dminus.
std::string hopf_lax_to_csv(const MetricMeasureSpace &space, const HopfLaxState &state);

} // namespace ricci

#endif
