// ricci-lab: batch front door for building spaces, running flows and verifier batteries,
// bounding transport distances and emitting reports.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ricci/evi_lab.hpp"
#include "ricci/hopflax.hpp"
#include "ricci/kernel_sim.hpp"
#include "ricci/mmdist.hpp"
#include "ricci/mmspace.hpp"
#include "ricci/report.hpp"
#include "ricci/scenario.hpp"

using nlohmann::json;
using namespace ricci;

namespace
{

constexpr int kExitError = 2;

// Flags that mirror configuration keys.  Unset flags leave the configuration untouched.
struct ConfigFlags
{
  std::string config_path;
  bool strict = false;
  std::optional<std::string> builder;
  std::optional<long long> n;
  std::optional<double> length;
  std::optional<double> w;
  std::optional<double> m0;
  std::optional<std::string> space_file;
  std::optional<double> K;
  std::optional<std::vector<double>> times;
  std::optional<long long> seed;
  std::optional<double> c_tol;
  std::optional<std::string> heat_mode;
  std::optional<double> euler_step;

  void add_to(CLI::App *app)
  {
    app->add_option("-c,--config", config_path, "JSON configuration file");
    app->add_flag("--strict-config", strict, "values from the configuration file win over flags");
    app->add_option("--builder", builder, "space builder (circle, interval, torus, cycle, two_point, ...)");
    app->add_option("--n", n, "number of points of the space builder");
    app->add_option("--length", length, "model length of circle, interval or torus");
    app->add_option("--w", w, "edge weight of the two-point space");
    app->add_option("--m0", m0, "mass of the first point of the two-point space");
    app->add_option("--space-file", space_file, "space JSON file (builder 'file')");
    app->add_option("--K", K, "curvature parameter");
    app->add_option("--times", times, "comma separated time grid")->delimiter(',');
    app->add_option("--seed", seed, "random seed");
    app->add_option("--c-tol", c_tol, "budget constant for h-dependent tolerances");
    app->add_option("--heat-mode", heat_mode, "spectral or implicit_euler");
    app->add_option("--euler-step", euler_step, "implicit Euler step");
  }

  json raw() const
  {
    json j = json::object();
    if (!config_path.empty())
    {
      std::ifstream f(config_path);
      if (!f)
        throw Error("cannot read configuration '" + config_path + "'");
      try
      {
        f >> j;
      }
      catch (const json::exception &e)
      {
        throw Error("malformed configuration '" + config_path + "': " + e.what());
      }
      if (!j.is_object())
        throw Error("configuration must be a JSON object");
    }
    const json file = j;
    auto put = [&](json &obj, const json &from, const std::string &key, const json &value) {
      if (strict && from.is_object() && from.contains(key))
      {
        std::fprintf(stderr, "note: --%s ignored, configuration file wins\n", key.c_str());
        return;
      }
      obj[key] = value;
    };
    const json file_space = file.value("space", json::object());
    json space = file_space;
    if (builder)
    {
      if (!(strict && file_space.contains("builder")) && space.value("builder", "") != *builder)
        space = json::object();
      put(space, file_space, "builder", *builder);
    }
    if (n)
      put(space, file_space, "n", *n);
    if (length)
      put(space, file_space, "length", *length);
    if (w)
      put(space, file_space, "w", *w);
    if (m0)
      put(space, file_space, "m0", *m0);
    if (space_file)
    {
      if (!builder && !space.contains("builder"))
        space["builder"] = "file";
      put(space, file_space, "path", *space_file);
    }
    if (!space.empty())
      j["space"] = space;
    if (K)
      put(j, file, "K", *K);
    if (times)
      put(j, file, "times", *times);
    if (seed)
      put(j, file, "seed", *seed);
    if (c_tol)
      put(j, file, "c_tol", *c_tol);
    if (heat_mode)
      put(j, file, "heat_mode", *heat_mode);
    if (euler_step)
      put(j, file, "euler_step", *euler_step);
    return j;
  }
};

void write_or_print(const std::string &path, const std::string &text)
{
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text_file(path, text);
}

void print_entries(const VerificationReport &rep)
{
  for (const auto &e : rep.entries)
  {
    if (e.status == EntryStatus::error)
      std::printf("%-28s error  %s\n", e.id.c_str(), e.error.c_str());
    else
      std::printf("%-28s %-5s  slack=%s tol=%s\n", e.id.c_str(), to_string(e.status).c_str(),
                  format_double(e.result.measured_slack).c_str(), format_double(e.result.tolerance).c_str());
  }
}

// Parses "key=value" overrides; values are JSON, falling back to a plain string.
json parse_overrides(const std::vector<std::string> &sets)
{
  json out = json::object();
  for (const auto &s : sets)
  {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error("override '" + s + "' is not key=value");
    const std::string value = s.substr(eq + 1);
    json v = json::parse(value, nullptr, false);
    out[s.substr(0, eq)] = v.is_discarded() ? json(value) : v;
  }
  return out;
}

int run_report(const ScenarioConfig &cfg, const std::string &output, const std::string &format)
{
  const ReportFormat fmt = parse_report_format(format);
  const VerificationReport rep = run_scenario(cfg, threads_from_environment());
  print_entries(rep);
  if (!output.empty())
    for (const auto &f : emit_report(rep, fmt, output))
      std::fprintf(stderr, "wrote %s\n", f.c_str());
  return rep.exit_code();
}

GridSpace load_grid(const std::string &path)
{
  std::ifstream f(path);
  if (!f)
    throw Error("cannot read space file '" + path + "'");
  json j;
  try
  {
    f >> j;
  }
  catch (const json::exception &e)
  {
    throw Error("malformed space file '" + path + "': " + e.what());
  }
  return grid_from_json(j);
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"ricci-lab: synthetic Ricci curvature on finite metric measure spaces"};
  app.require_subcommand(1);
  ConfigFlags flags;
  std::string output;
  std::string format = "json";

  // space
  auto *space = app.add_subcommand("space", "build or validate a metric measure space");
  space->require_subcommand(1);
  auto *space_build = space->add_subcommand("build", "write the space as JSON");
  auto *space_validate = space->add_subcommand("validate", "check metric and probability axioms");
  for (auto *c : {space_build, space_validate})
  {
    flags.add_to(c);
    c->add_option("-o,--output", output, "output file (stdout when omitted)");
  }

  // flow
  auto *flow = app.add_subcommand("flow", "heat flow or minimizing movement trajectories as CSV");
  flow->require_subcommand(1);
  auto *flow_heat = flow->add_subcommand("heat", "heat flow of mu at the configured times");
  auto *flow_jko = flow->add_subcommand("jko", "minimizing movement scheme for the entropy");
  double tau = 1e-3;
  long long steps = 100;
  flow_jko->add_option("--tau", tau, "time step")->check(CLI::PositiveNumber);
  flow_jko->add_option("--steps", steps, "number of steps")->check(CLI::PositiveNumber);
  for (auto *c : {flow_heat, flow_jko})
  {
    flags.add_to(c);
    c->add_option("-o,--output", output, "output CSV (stdout when omitted)");
  }

  // verify
  auto *verify = app.add_subcommand("verify", "run one check or the default battery");
  std::string check_name;
  std::vector<std::string> sets;
  verify->add_option("check", check_name, "check name, or 'battery'")->required();
  verify->add_option("--set", sets, "per-check override key=value (repeatable)");
  verify->add_option("-o,--output", output, "report path (file for json, directory for csv-bundle)");
  verify->add_option("--format", format, "json or csv-bundle");
  flags.add_to(verify);

  // kernel and brownian
  auto *kernel = app.add_subcommand("kernel", "heat kernel p_t(x, y) as CSV");
  double kernel_t = 0.1;
  kernel->add_option("--t", kernel_t, "time")->check(CLI::PositiveNumber);
  kernel->add_option("-o,--output", output, "output CSV (stdout when omitted)");
  flags.add_to(kernel);

  auto *brownian = app.add_subcommand("brownian", "sample paths of the jump process as CSV");
  long long x0 = 0, paths = 10;
  double horizon = 0.5;
  brownian->add_option("--x0", x0, "start point");
  brownian->add_option("--T", horizon, "horizon")->check(CLI::PositiveNumber);
  brownian->add_option("--paths", paths, "number of paths")->check(CLI::PositiveNumber);
  brownian->add_option("-o,--output", output, "output CSV (stdout when omitted)");
  flags.add_to(brownian);

  // dist
  auto *dist = app.add_subcommand("dist", "upper bounds on the distance between spaces");
  dist->require_subcommand(1);
  auto *dist_upper = dist->add_subcommand("upper", "bound between two space files");
  std::string x_path, y_path;
  DistanceOptions dopt;
  dist_upper->add_option("x", x_path, "first space JSON")->required();
  dist_upper->add_option("y", y_path, "second space JSON")->required();
  auto *dist_stability = dist->add_subcommand("stability", "circle refinements n -> 2n with the CD and EVI checks");
  std::vector<long long> sizes{16, 32, 64};
  double stab_length = 4.0 * M_PI, stab_K = 0.0;
  dist_stability->add_option("--sizes", sizes, "comma separated grid sizes")->delimiter(',');
  dist_stability->add_option("--length", stab_length, "circle length");
  dist_stability->add_option("--K", stab_K, "curvature parameter");
  for (auto *c : {dist_upper, dist_stability})
  {
    c->add_option("--rounds", dopt.rounds, "alternation rounds");
    c->add_option("--restarts", dopt.restarts, "random restarts");
    c->add_option("--seed", dopt.seed, "restart seed");
    c->add_option("-o,--output", output, "output JSON (stdout when omitted)");
  }

  // report
  auto *report = app.add_subcommand("report", "validate a report and optionally rerun its configuration");
  std::string report_path;
  bool rerun = false;
  report->add_option("file", report_path, "report JSON")->required();
  report->add_flag("--rerun", rerun, "rerun the echoed configuration and compare bytes");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try
  {
    dopt.threads = threads_from_environment();
    if (space_build->parsed() || space_validate->parsed())
    {
      const ScenarioSetting st = build_setting(ScenarioConfig::parse(flags.raw()));
      if (space_build->parsed())
      {
        write_or_print(output, deterministic_dump(grid_to_json(st.grid)));
        return 0;
      }
      const ValidationResult v = validate_space(st.grid.space());
      json j = {{"triangle_violation", v.triangle_violation}, {"asymmetry", v.asymmetry},
                {"negativity", v.negativity},                 {"mass_defect", v.mass_defect},
                {"negative_mass", v.negative_mass},           {"tolerance", v.tolerance},
                {"pass", v.pass}};
      write_or_print(output, deterministic_dump(j));
      return v.pass ? 0 : 1;
    }
    if (flow_heat->parsed() || flow_jko->parsed())
    {
      const ScenarioConfig cfg = ScenarioConfig::parse(flags.raw());
      const ScenarioSetting st = build_setting(cfg);
      const Vector rho0 =
          measure_from_spec(st.grid, cfg.json().at("mu"), cfg.json().at("seed").get<std::uint64_t>())
              .cwiseQuotient(st.grid.space().measure());
      if (flow_heat->parsed())
      {
        write_or_print(output, heat_flow(*st.ho, rho0, cfg.json().at("times").get<std::vector<double>>()).to_csv());
        return 0;
      }
      std::vector<JkoStepInfo> info;
      const FlowTrajectory traj = jko_flow(st.grid, rho0, tau, steps, {}, &info);
      double worst = 0.0;
      for (const auto &s : info)
        worst = std::max(worst, s.kkt_residual);
      std::fprintf(stderr, "max KKT residual %s\n", format_double(worst).c_str());
      write_or_print(output, traj.to_csv());
      return 0;
    }
    if (verify->parsed())
    {
      json raw = flags.raw();
      if (check_name == "battery")
      {
        if (!sets.empty())
          throw Error("--set applies to a single check, not the battery");
        if (!(flags.strict && raw.contains("checks")))
          raw["checks"] = "battery";
      }
      else
      {
        json c = parse_overrides(sets);
        c["name"] = check_name;
        if (!(flags.strict && raw.contains("checks")))
          raw["checks"] = json::array({c});
      }
      return run_report(ScenarioConfig::parse(raw), output, format);
    }
    if (kernel->parsed())
    {
      const ScenarioSetting st = build_setting(ScenarioConfig::parse(flags.raw()));
      const HeatKernel k = heat_kernel(*st.ho, kernel_t);
      if (k.clipped_mass > 0.0)
        std::fprintf(stderr, "clipped negative mass %s\n", format_double(k.clipped_mass).c_str());
      write_or_print(output, k.to_csv());
      return 0;
    }
    if (brownian->parsed())
    {
      const ScenarioConfig cfg = ScenarioConfig::parse(flags.raw());
      const ScenarioSetting st = build_setting(cfg);
      const std::uint64_t seed = cfg.json().at("seed").get<std::uint64_t>();
      std::string csv = "path,time,state\n";
      for (long long k = 0; k < paths; ++k)
      {
        const SamplePath p = sample_brownian(*st.ds, x0, horizon, seed, static_cast<std::uint64_t>(k));
        csv += std::to_string(k) + ",0," + std::to_string(p.states[0]) + "\n";
        for (std::size_t i = 0; i < p.jump_times.size(); ++i)
          csv += std::to_string(k) + "," + format_double(p.jump_times[i]) + "," + std::to_string(p.states[i + 1]) +
                 "\n";
      }
      write_or_print(output, csv);
      return 0;
    }
    if (dist_upper->parsed())
    {
      const GridSpace x = load_grid(x_path), y = load_grid(y_path);
      const DistanceBound b = d_upper_bound(x.space(), y.space(), {}, dopt);
      write_or_print(output, deterministic_dump(b.to_json()));
      return 0;
    }
    if (dist_stability->parsed())
    {
      std::vector<GridSpace> family;
      for (long long n : sizes)
        family.push_back(build_circle_grid(stab_length, n));
      auto battery = [&](const GridSpace &g) {
        const DirichletStructure ds = grid_structure(g);
        const HeatOperator ho(ds, HeatMode::spectral);
        json mu = {{"kind", "bump"}, {"center", 0.0}, {"kappa", 1.0}};
        json nu = {{"kind", "bump"}, {"center", 0.375}, {"kappa", 1.0}};
        const Vector a = measure_from_spec(g, mu, 1), b = measure_from_spec(g, nu, 1);
        return std::vector<CheckResult>{cd_convexity_check(g, a, b, stab_K, 16),
                                        evi_check(g, ho, a, b, stab_K, {0.0, 0.5, 1.0, 2.0, 4.0, 8.0})};
      };
      const StabilityReport r = stability_experiment(family, battery, dopt);
      write_or_print(output, deterministic_dump(r.to_json()));
      return r.summary.pass ? 0 : 1;
    }
    if (report->parsed())
    {
      std::ifstream f(report_path);
      if (!f)
        throw Error("cannot read report '" + report_path + "'");
      const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
      const json j = json::parse(bytes);
      validate_report_json(j);
      for (const auto &e : j.at("entries"))
        std::printf("%-28s %s\n", e.at("id").get<std::string>().c_str(), e.at("status").get<std::string>().c_str());
      if (rerun)
      {
        const VerificationReport again = run_scenario(ScenarioConfig::parse(j.at("config")), threads_from_environment());
        const bool same = deterministic_dump(again.to_json()) == bytes;
        std::printf("rerun %s\n", same ? "identical" : "differs");
        if (!same)
          return 1;
      }
      return j.at("exit_code").get<int>();
    }
  }
  catch (const std::exception &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
