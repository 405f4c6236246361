// Scenario configuration and the orchestrator that runs verifier batteries on a space.

#ifndef RICCI_SCENARIO_HPP
#define RICCI_SCENARIO_HPP

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ricci/dirichlet.hpp"
#include "ricci/mmspace.hpp"
#include "ricci/report.hpp"

namespace ricci
{

/// A validated configuration with every default written out.  Unknown keys anywhere are
/// rejected.  `checks` may be given as the string "battery", which expands to the default
/// battery of the space builder.
class ScenarioConfig
{
public:
  static ScenarioConfig parse(const nlohmann::json &raw);
  static ScenarioConfig from_file(const std::string &path);

  const nlohmann::json &json() const { return j_; }
  /// Materialized parameters of the k-th check, including inherited K, times and c_tol.
  const nlohmann::json &check(std::size_t k) const { return j_.at("checks").at(k); }
  std::size_t check_count() const { return j_.at("checks").size(); }

private:
  nlohmann::json j_;
};

/// Names accepted in the check list.
std::vector<std::string> known_checks();

/// Default check list for a space builder name, with per-check overrides where the builder
/// calls for them (for example the W2 contraction rate of the two-point space).
nlohmann::json default_battery(const std::string &builder);

/// Space, Dirichlet structure and heat operator described by a configuration.
struct ScenarioSetting
{
  GridSpace grid;
  std::shared_ptr<const DirichletStructure> ds;
  std::shared_ptr<const HeatOperator> ho;
};

ScenarioSetting build_setting(const ScenarioConfig &config);

/// Materializes a measure spec ("auto", "bump", "uniform", "random", "explicit") on a grid.
Vector measure_from_spec(const GridSpace &grid, const nlohmann::json &spec, std::uint64_t seed);

/// Runs the declared checks on a bounded pool; results keep the declared order.
VerificationReport run_scenario(const ScenarioConfig &config, int threads = 1);

/// Identifies the build: schema, compiler and Eigen version.  Contains nothing run-dependent.
nlohmann::json environment_fingerprint();

/// Worker count from RICCI_LAB_THREADS, defaulting to 1 and clamped to [1, 64].
int threads_from_environment();

} // namespace ricci

#endif
