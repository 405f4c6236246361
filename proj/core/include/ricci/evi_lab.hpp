// Flow-level verifiers: EVI, contraction, Bakry-Emery, log-Sobolev, dissipation,
// regularization estimates, the JKO scheme and the two first-variation inequalities.

#ifndef RICCI_EVI_LAB_HPP
#define RICCI_EVI_LAB_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ricci/check.hpp"
#include "ricci/common.hpp"
#include "ricci/dirichlet.hpp"
#include "ricci/entropy_geo.hpp"
#include "ricci/mmspace.hpp"

namespace ricci
{

/// I_K(t) = integral_0^t e^{Kr} dr.
double ik(double K, double t);

struct FlowTrajectory
{
  std::vector<double> times;
  /// Densities with respect to m.
  std::vector<Vector> densities;
  std::string provenance;

  std::string to_csv() const;
};

/// rho_t = H_t rho0 at the given increasing times.
FlowTrajectory heat_flow(const HeatOperator &ho, const Vector &rho0, const std::vector<double> &times);

/// Integral-form EVI over all ordered pairs of grid times, plus the differential form at
/// interior times (central differences with one Richardson step).  Slack is the worst positive
/// part; the budget is the CD budget plus the observed finite-difference error.
CheckResult evi_check(const GridSpace &grid, const HeatOperator &ho, const Vector &mu, const Vector &nu, double K,
                      const std::vector<double> &times, double c_tol = kDefaultCTol);

/// W2 and W1 of the flows from mu and nu against e^{-Kt} times their initial distance.
CheckResult contraction_check(const GridSpace &grid, const HeatOperator &ho, const Vector &mu, const Vector &nu,
                              double K, const std::vector<double> &times, double c_tol = kDefaultCTol);

/// max over x, t of [Gamma(H_t f) - e^{-2Kt} H_t Gamma(f)]^+.
CheckResult bakry_emery_check(const HeatOperator &ho, const Vector &f, double K, const std::vector<double> &times,
                              double tol = 1e-10);

/// Random unit-norm f against Ent(f^2) <= (2/K) sum m Gamma(f).  Also reports the implied
/// best constant min(sampled ratios, spectral gap).
CheckResult log_sobolev_check(const HeatOperator &ho, double K, int trials, std::uint64_t seed, double tol = 1e-10);

/// -d/dt Ent(rho_t m) against sum m Gamma(rho_t, log rho_t); reports the gap to 4 C(sqrt rho_t).
CheckResult dissipation_check(const HeatOperator &ho, const Vector &rho0, const std::vector<double> &times,
                              double tol = 1e-8);

struct JkoOptions
{
  double kkt_tolerance = 1e-7;
  int max_inner_iterations = 20000;
  /// Transport between cell reconstructions on 1D model grids; the grid LP otherwise.
  bool use_cell_transport = true;
};

struct JkoStepInfo
{
  int iterations = 0;
  double kkt_residual = 0.0;
};

/// Minimizing movement for the entropy: each step minimizes W2^2(mu, nu) / (2 tau) + Ent(nu | m)
/// over the simplex by mirror descent with Armijo backtracking.
FlowTrajectory jko_flow(const GridSpace &grid, const Vector &rho0, double tau, Index steps,
                        const JkoOptions &options = {}, std::vector<JkoStepInfo> *info = nullptr);

/// L1(m) error between the JKO flow and H_T rho0 for each tau; passes when each halving of tau
/// shrinks the error by at least the factor 0.75.
CheckResult identification_check(const GridSpace &grid, const HeatOperator &ho, const Vector &rho0,
                                  const std::vector<double> &taus, double T, const JkoOptions &options = {});

/// Backward difference of W2^2(rho_t m, sigma) / 2 against (C(rho_t - eps phi_t) - C(rho_t)) / eps.
CheckResult derivative_w2_check(const GridSpace &grid, const HeatOperator &ho, const Vector &rho0,
                                const Vector &sigma, double t, const std::vector<double> &eps_list);

/// Ent(rho1 m) - Ent(rho0 m) - (K/2) W2^2 >= (C(phi) - C(phi + eps rho0)) / eps - budget.
CheckResult derivative_entropy_check(const GridSpace &grid, const DirichletStructure &ds, const Vector &rho0,
                                     const Vector &rho1, double K, const std::vector<double> &eps_list,
                                     double c_tol = kDefaultCTol);

/// I_K(t) Ent(mu_t) + I_K(t)^2 / 2 * F(mu_t) <= W2^2(m, mu) / 2 with F = 4 C(sqrt rho_t).
CheckResult ultra_evi_check(const GridSpace &grid, const HeatOperator &ho, const Vector &mu, double K,
                            const std::vector<double> &times, double c_tol = kDefaultCTol);

/// max over x, t of [2 I_{2K}(t) Gamma(H_t f) - H_t(f^2)]^+.
CheckResult lipschitz_regularization_check(const HeatOperator &ho, const Vector &f, double K,
                                           const std::vector<double> &times, double tol = 1e-10);

} // namespace ricci

#endif
