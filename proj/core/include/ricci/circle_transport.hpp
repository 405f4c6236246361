// Quadratic transport between piecewise-constant reconstructions of grid measures on a
// one-dimensional model (interval or circle), computed from quantile functions.

#ifndef RICCI_CIRCLE_TRANSPORT_HPP
#define RICCI_CIRCLE_TRANSPORT_HPP

#include "ricci/common.hpp"
#include "ricci/mmspace.hpp"

namespace ricci
{

struct CellTransport
{
  double w2_squared = 0.0;
  /// Quantile rotation of the optimal circle coupling (0 on the interval).
  double theta = 0.0;
  /// Cell averages of the target-side potential psi with psi' = y - T^{-1}(y); this is the
  /// gradient of W2^2 / 2 with respect to the target cell masses, up to a constant.
  Vector potential;
};

/// Each grid point owns a cell of width h centred on it.  On the circle the coupling is
/// X(s) -> Y(s + theta) with theta solving the first-order condition.
CellTransport cell_transport(const GridSpace &grid, const Vector &mu, const Vector &nu, bool with_potential,
                             double theta_hint = 0.0);

} // namespace ricci

#endif
