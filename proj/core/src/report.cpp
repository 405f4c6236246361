#include "ricci/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ricci/common.hpp"

namespace ricci
{

std::string to_string(EntryStatus s)
{
  switch (s)
  {
  case EntryStatus::pass:
    return "pass";
  case EntryStatus::fail:
    return "fail";
  case EntryStatus::error:
    return "error";
  }
  return "error";
}

int VerificationReport::exit_code() const
{
  int code = 0;
  for (const auto &e : entries)
  {
    if (e.status == EntryStatus::error)
      return 2;
    if (e.status == EntryStatus::fail)
      code = 1;
  }
  return code;
}

nlohmann::json check_to_json(const CheckResult &r)
{
  nlohmann::json j;
  j["name"] = r.name;
  j["anchor"] = r.anchor;
  j["measured_slack"] = r.measured_slack;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["context"] = r.context;
  if (!r.diagnostics.empty())
  {
    j["diagnostic_columns"] = r.diagnostics.columns;
    j["diagnostic_rows"] = r.diagnostics.rows.size();
  }
  return j;
}

nlohmann::json VerificationReport::to_json() const
{
  nlohmann::json j;
  j["schema"] = kSchemaVersion;
  j["config"] = config;
  j["environment"] = environment;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &e : entries)
  {
    nlohmann::json x;
    x["id"] = e.id;
    x["check"] = e.check;
    x["status"] = to_string(e.status);
    if (e.status == EntryStatus::error)
      x["error"] = e.error;
    else
      x["result"] = check_to_json(e.result);
    arr.push_back(x);
  }
  j["entries"] = arr;
  j["exit_code"] = exit_code();
  return j;
}

nlohmann::json VerificationReport::timings_json() const
{
  nlohmann::json j;
  j["schema"] = kSchemaVersion;
  nlohmann::json t = nlohmann::json::object();
  for (const auto &e : entries)
    t[e.id] = e.seconds;
  j["seconds"] = t;
  return j;
}

namespace
{

void dump(const nlohmann::json &j, int indent, std::string &out)
{
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type())
  {
  case nlohmann::json::value_t::object:
  {
    if (j.empty())
    {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    // nlohmann::json objects iterate in key order.
    for (auto it = j.begin(); it != j.end(); ++it)
    {
      if (!first)
        out += ",\n";
      first = false;
      out += pad + nlohmann::json(it.key()).dump() + ": ";
      dump(it.value(), indent + 2, out);
    }
    out += "\n" + close + "}";
    return;
  }
  case nlohmann::json::value_t::array:
  {
    if (j.empty())
    {
      out += "[]";
      return;
    }
    out += "[\n";
    for (std::size_t k = 0; k < j.size(); ++k)
    {
      if (k > 0)
        out += ",\n";
      out += pad;
      dump(j[k], indent + 2, out);
    }
    out += "\n" + close + "]";
    return;
  }
  case nlohmann::json::value_t::number_float:
  {
    const double v = j.get<double>();
    if (std::isfinite(v))
      out += format_double(v);
    else
      out += "\"" + format_double(v) + "\"";
    return;
  }
  default:
    out += j.dump();
  }
}

} // namespace

std::string deterministic_dump(const nlohmann::json &j)
{
  std::string out;
  dump(j, 0, out);
  out += "\n";
  return out;
}

void validate_report_json(const nlohmann::json &j)
{
  auto need = [&](const nlohmann::json &obj, const char *key) -> const nlohmann::json & {
    if (!obj.is_object() || !obj.contains(key))
      throw Error(std::string("report is missing key '") + key + "'");
    return obj.at(key);
  };
  if (need(j, "schema") != kSchemaVersion)
    throw Error("report schema is not " + std::string(kSchemaVersion));
  need(j, "config");
  need(j, "environment");
  need(j, "exit_code");
  const auto &entries = need(j, "entries");
  if (!entries.is_array())
    throw Error("report entries must be an array");
  for (const auto &e : entries)
  {
    need(e, "id");
    need(e, "check");
    const std::string status = need(e, "status").get<std::string>();
    if (status == "error")
      need(e, "error");
    else if (status == "pass" || status == "fail")
    {
      const auto &r = need(e, "result");
      for (const char *k : {"name", "anchor", "measured_slack", "tolerance", "pass", "context"})
        need(r, k);
      if (r.at("pass").get<bool>() != (status == "pass"))
        throw Error("entry status disagrees with its result");
    }
    else
      throw Error("unknown entry status '" + status + "'");
  }
}

ReportFormat parse_report_format(const std::string &s)
{
  if (s == "json")
    return ReportFormat::json;
  if (s == "csv-bundle")
    return ReportFormat::csv_bundle;
  throw Error("unknown report format '" + s + "' (expected json or csv-bundle)");
}

void write_text_file(const std::string &path, const std::string &text)
{
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw Error("cannot write '" + path + "'");
  f << text;
  if (!f)
    throw Error("failed while writing '" + path + "'");
}

std::vector<std::string> emit_report(const VerificationReport &report, ReportFormat format, const std::string &path)
{
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  if (format == ReportFormat::json)
  {
    fs::path p(path);
    fs::path timings = p.parent_path() / (p.stem().string() + ".timings.json");
    write_text_file(p.string(), deterministic_dump(report.to_json()));
    write_text_file(timings.string(), deterministic_dump(report.timings_json()));
    files = {p.string(), timings.string()};
    return files;
  }
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec)
    throw Error("cannot create directory '" + path + "': " + ec.message());
  const fs::path dir(path);
  nlohmann::json manifest;
  manifest["schema"] = kSchemaVersion;
  manifest["report"] = "report.json";
  manifest["timings"] = "timings.json";
  nlohmann::json tables = nlohmann::json::array();
  for (const auto &e : report.entries)
  {
    if (e.status == EntryStatus::error || e.result.diagnostics.empty())
      continue;
    const std::string name = e.id + ".csv";
    write_text_file((dir / name).string(), e.result.diagnostics.to_csv());
    files.push_back((dir / name).string());
    nlohmann::json t;
    t["id"] = e.id;
    t["file"] = name;
    t["columns"] = e.result.diagnostics.columns;
    tables.push_back(t);
  }
  manifest["tables"] = tables;
  write_text_file((dir / "report.json").string(), deterministic_dump(report.to_json()));
  write_text_file((dir / "timings.json").string(), deterministic_dump(report.timings_json()));
  write_text_file((dir / "manifest.json").string(), deterministic_dump(manifest));
  for (const char *f : {"report.json", "timings.json", "manifest.json"})
    files.push_back((dir / f).string());
  return files;
}

} // namespace ricci
