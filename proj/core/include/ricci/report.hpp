// Verification reports and their deterministic serialization.

#ifndef RICCI_REPORT_HPP
#define RICCI_REPORT_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "ricci/check.hpp"

namespace ricci
{

enum class EntryStatus
{
  pass,
  fail,
  error
};

std::string to_string(EntryStatus s);

struct ReportEntry
{
  /// Position-unique id such as "03_evi".
  std::string id;
  std::string check;
  EntryStatus status = EntryStatus::pass;
  CheckResult result;
  std::string error;
  /// Wall clock; written to the separate timings file only.
  double seconds = 0.0;
};

struct VerificationReport
{
  /// Fully materialized configuration; rerunning it reproduces the report.
  nlohmann::json config;
  nlohmann::json environment;
  std::vector<ReportEntry> entries;

  /// 0 when every entry passes, 2 when any entry errored, 1 otherwise.
  int exit_code() const;
  nlohmann::json to_json() const;
  nlohmann::json timings_json() const;
};

nlohmann::json check_to_json(const CheckResult &r);

/// Sorted keys, two-space indentation, doubles with 17 significant digits and non-finite
/// values as the strings "inf", "-inf" and "nan".
std::string deterministic_dump(const nlohmann::json &j);

/// Throws Error when `j` is not a report of the current schema.
void validate_report_json(const nlohmann::json &j);

enum class ReportFormat
{
  json,
  csv_bundle
};

ReportFormat parse_report_format(const std::string &s);

/// json: writes `path` and `<path stem>.timings.json`.  csv-bundle: creates directory `path`
/// with report.json, timings.json, manifest.json and one CSV per diagnostic table.
/// Returns the written files.
std::vector<std::string> emit_report(const VerificationReport &report, ReportFormat format, const std::string &path);

/// Writes text to a file, throwing Error when it cannot be opened.
void write_text_file(const std::string &path, const std::string &text);

} // namespace ricci

#endif
