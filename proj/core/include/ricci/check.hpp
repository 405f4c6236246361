// Outcome record shared by every verifier in the library.

#ifndef RICCI_CHECK_HPP
#define RICCI_CHECK_HPP

#include <concepts>
#include <map>
#include <string>
#include <vector>

namespace ricci
{

/// Column-named numeric table; emitted as CSV next to a report.
struct DiagnosticTable
{
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool empty() const { return rows.empty(); }
  void add_row(std::vector<double> row) { rows.push_back(std::move(row)); }
  std::string to_csv() const;
};

/// A named check with its measured slack and tolerance.
/// Invariant: pass == (measured_slack <= tolerance); a NaN slack never passes.
struct CheckResult
{
  std::string name;
  /// Human-readable name of the inequality or identity under test.
  std::string anchor;
  double measured_slack = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::map<std::string, std::string> context;
  DiagnosticTable diagnostics;

  static CheckResult make(std::string name, std::string anchor, double slack, double tolerance);

  void set(const std::string &key, double value);
  void set(const std::string &key, const std::string &value);
  void set(const std::string &key, const char *value) { set(key, std::string(value)); }
  template <std::integral T>
    requires(!std::same_as<T, bool>)
  void set(const std::string &key, T value)
  {
    set_integer(key, static_cast<long long>(value));
  }
  void set(const std::string &key, bool value);

  void set_integer(const std::string &key, long long value);

  /// Re-derive pass after slack or tolerance were adjusted.
  void finalize();
};

} // namespace ricci

#endif
