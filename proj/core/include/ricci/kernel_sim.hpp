// Heat kernel tables, their identities, and continuous-time Markov chain sampling of the
// associated Brownian motion.

#ifndef RICCI_KERNEL_SIM_HPP
#define RICCI_KERNEL_SIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ricci/check.hpp"
#include "ricci/common.hpp"
#include "ricci/dirichlet.hpp"
#include "ricci/mmspace.hpp"

namespace ricci
{

struct HeatKernel
{
  double t = 0.0;
  /// p(x, y): density of H_t(delta_x) with respect to m, evaluated at y.
  Matrix p;
  /// Total m-weighted mass of negative rounding entries set to zero, and the most negative one.
  double clipped_mass = 0.0;
  double most_negative = 0.0;

  std::string to_csv() const;
};

HeatKernel heat_kernel(const HeatOperator &ho, double t);

/// max |p(x, y) - p(y, x)| <= tol.
CheckResult symmetry_check(const HeatKernel &kernel, double tol = 1e-10);

/// max |p_{t+s}(x, y) - sum_z p_t(x, z) p_s(z, y) m_z| <= tol.
CheckResult chapman_kolmogorov_check(const HeatOperator &ho, double t, double s, double tol = 1e-10);

/// sqrt(I_{2K}(t)) * sum_z |p_t(x, z) - p_t(y, z)| m_z <= d(x, y) + budget for each pair; the
/// budget is 2h + 1e-10 (grid distances sit within h of the model distances).
CheckResult w1_l1_check(const GridSpace &grid, const HeatOperator &ho, double K, double t,
                        const std::vector<std::pair<Index, Index>> &pairs);

struct SamplePath
{
  std::vector<double> jump_times;
  /// states[0] is the start; states[k] is occupied from jump_times[k-1] on.
  std::vector<Index> states;
  double horizon = 0.0;

  Index state_at(double t) const;
  std::string to_csv() const;
};

/// Jump rates q(x, y) = w(x, y) / m(x), so the generator is the Laplacian.  Path k of a run
/// draws from the stream (seed, k).
SamplePath sample_brownian(const DirichletStructure &ds, Index x0, double T, std::uint64_t seed,
                           std::uint64_t path_index = 0);

/// Total variation between the empirical law of X_T over N paths and p_T(x0, .) m; passes
/// when TV <= tv_constant * sqrt(n / N).  Paths are split over `threads` workers.
CheckResult empirical_vs_kernel_check(const DirichletStructure &ds, const HeatOperator &ho, Index x0, double T,
                                      std::int64_t N, std::uint64_t seed, int threads = 1,
                                      double tv_constant = 3.0);

} // namespace ricci

#endif
