#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ricci/scenario.hpp"

using namespace ricci;
using nlohmann::json;

namespace
{

std::string slurp(const std::filesystem::path &p)
{
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string &name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("ricci_lab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace

TEST_CASE("defaults are materialized and unknown keys rejected")
{
  const ScenarioConfig cfg = ScenarioConfig::parse(json::object());
  const json &j = cfg.json();
  CHECK(j.at("schema") == "ricci-lab/1");
  CHECK(j.at("space").at("builder") == "circle");
  CHECK(j.at("space").at("n") == 64);
  CHECK(j.at("K") == 0.0);
  CHECK(j.at("checks").empty());
  CHECK_THROWS_AS(ScenarioConfig::parse(json{{"bogus", 1}}), Error);
  CHECK_THROWS_AS(ScenarioConfig::parse(json{{"space", {{"builder", "circle"}, {"m0", 0.5}}}}), Error);
  CHECK_THROWS_AS(ScenarioConfig::parse(json{{"checks", {{{"name", "evi"}, {"trials", 3}}}}}), Error);
  CHECK_THROWS_AS(ScenarioConfig::parse(json{{"checks", {"no_such_check"}}}), Error);
  CHECK_THROWS_AS(ScenarioConfig::parse(json{{"times", {0.5, 0.1}}}), Error);
  // Re-parsing the materialized form is a fixed point.
  const ScenarioConfig again = ScenarioConfig::parse(json{{"checks", "battery"}});
  CHECK(ScenarioConfig::parse(again.json()).json() == again.json());
}

TEST_CASE("per-check overrides win over inherited values")
{
  const ScenarioConfig cfg =
      ScenarioConfig::parse(json{{"K", 1.5}, {"checks", {"evi", {{"name", "evi"}, {"K", 0.0}}}}});
  CHECK(cfg.check(0).at("K") == 1.5);
  CHECK(cfg.check(1).at("K") == 0.0);
}

TEST_CASE("empty check list gives an empty passing report")
{
  const VerificationReport rep = run_scenario(ScenarioConfig::parse(json::object()));
  CHECK(rep.entries.empty());
  CHECK(rep.exit_code() == 0);
  validate_report_json(rep.to_json());
}

TEST_CASE("two-point battery at its exact constant passes")
{
  const ScenarioConfig cfg =
      ScenarioConfig::parse(json{{"space", {{"builder", "two_point"}}}, {"K", 4.0}, {"checks", "battery"}});
  const VerificationReport rep = run_scenario(cfg);
  for (const auto &e : rep.entries)
  {
    INFO(e.id);
    CHECK(e.status == EntryStatus::pass);
  }
  CHECK(rep.exit_code() == 0);
}

TEST_CASE("errors are captured per entry")
{
  const ScenarioConfig cfg = ScenarioConfig::parse(
      json{{"space", {{"builder", "two_point"}}}, {"checks", {{{"name", "dissipation"}, {"times", {0.0}}}, "kernel_symmetry"}}});
  const VerificationReport rep = run_scenario(cfg);
  REQUIRE(rep.entries.size() == 2);
  CHECK(rep.entries[0].status == EntryStatus::error);
  CHECK(rep.entries[1].status == EntryStatus::pass);
  CHECK(rep.exit_code() == 2);
  validate_report_json(rep.to_json());

  const ScenarioConfig missing = ScenarioConfig::parse(
      json{{"space", {{"builder", "file"}, {"path", "/nonexistent/space.json"}}}, {"checks", {"evi"}}});
  const VerificationReport bad = run_scenario(missing);
  CHECK(bad.entries.at(0).status == EntryStatus::error);
  CHECK(bad.exit_code() == 2);
}

TEST_CASE("failing checks give exit code 1")
{
  const ScenarioConfig cfg = ScenarioConfig::parse(
      json{{"space", {{"builder", "two_point"}}}, {"K", 4.5}, {"checks", {"bakry_emery"}}});
  CHECK(run_scenario(cfg).exit_code() == 1);
}

TEST_CASE("reports are byte deterministic across runs and thread counts")
{
  const ScenarioConfig cfg = ScenarioConfig::parse(json{{"space", {{"builder", "cycle"}, {"n", 12}}},
                                                        {"seed", 5},
                                                        {"checks", "battery"}});
  const std::string a = deterministic_dump(run_scenario(cfg, 1).to_json());
  const std::string b = deterministic_dump(run_scenario(cfg, 1).to_json());
  const std::string c = deterministic_dump(run_scenario(cfg, 3).to_json());
  CHECK(a == b);
  CHECK(a == c);
  // A different seed changes the random test functions.
  const ScenarioConfig other = ScenarioConfig::parse(json{{"space", {{"builder", "cycle"}, {"n", 12}}},
                                                          {"seed", 6},
                                                          {"checks", "battery"}});
  CHECK(deterministic_dump(run_scenario(other).to_json()) != a);
}

TEST_CASE("deterministic dump formatting")
{
  json j;
  j["b"] = 0.1;
  j["a"] = std::numeric_limits<double>::infinity();
  j["c"] = json::array({1, 2});
  CHECK(deterministic_dump(j) == "{\n  \"a\": \"inf\",\n  \"b\": 0.10000000000000001,\n  \"c\": [\n    1,\n    2\n  ]\n}\n");
}

TEST_CASE("json report round trips through the validator and reruns identically")
{
  const auto dir = scratch_dir("json");
  const ScenarioConfig cfg = ScenarioConfig::parse(
      json{{"space", {{"builder", "two_point"}}}, {"K", 4.0}, {"checks", {"evi", "hj_identity"}}});
  const VerificationReport rep = run_scenario(cfg);
  const auto files = emit_report(rep, ReportFormat::json, (dir / "r.json").string());
  CHECK(files.size() == 2);
  CHECK(std::filesystem::exists(dir / "r.timings.json"));
  const std::string first = slurp(dir / "r.json");
  const json parsed = json::parse(first);
  validate_report_json(parsed);
  const VerificationReport rerun = run_scenario(ScenarioConfig::parse(parsed.at("config")));
  CHECK(deterministic_dump(rerun.to_json()) == first);
  emit_report(rep, ReportFormat::json, (dir / "r.json").string());
  CHECK(slurp(dir / "r.json") == first);
  CHECK_THROWS_AS(validate_report_json(json{{"schema", "other"}}), Error);
  CHECK_THROWS_AS(emit_report(rep, ReportFormat::json, "/nonexistent/dir/r.json"), Error);
}

TEST_CASE("csv bundle manifest lists existing tables")
{
  const auto dir = scratch_dir("bundle");
  const ScenarioConfig cfg = ScenarioConfig::parse(json{{"space", {{"builder", "circle"}, {"n", 16}}},
                                                        {"checks", {"evi", "energy_measure_limit"}}});
  const VerificationReport rep = run_scenario(cfg);
  emit_report(rep, ReportFormat::csv_bundle, (dir / "out").string());
  const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  REQUIRE(manifest.at("tables").size() == 2);
  for (const auto &t : manifest.at("tables"))
  {
    const std::string csv = slurp(dir / "out" / t.at("file").get<std::string>());
    CHECK(!csv.empty());
    CHECK(csv.rfind(t.at("columns").at(0).get<std::string>(), 0) == 0);
  }
  validate_report_json(json::parse(slurp(dir / "out" / "report.json")));
  CHECK_THROWS_AS(parse_report_format("xml"), Error);
}

TEST_CASE("measure specs")
{
  const GridSpace g = build_circle_grid(1.0, 16);
  const Vector u = measure_from_spec(g, json{{"kind", "uniform"}}, 1);
  CHECK((u - g.space().measure()).cwiseAbs().maxCoeff() < 1e-15);
  const Vector b = measure_from_spec(g, json{{"kind", "bump"}, {"center", 0.25}, {"kappa", 2.0}}, 1);
  CHECK(b.sum() == doctest::Approx(1.0));
  CHECK(b[4] == b.maxCoeff());
  CHECK_THROWS_AS(measure_from_spec(g, json{{"kind", "explicit"}, {"values", {1.0, 2.0}}}, 1), Error);
}
