#include "ricci/check.hpp"

#include <cmath>
#include <sstream>

#include "ricci/common.hpp"

namespace ricci
{

std::string DiagnosticTable::to_csv() const
{
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto &row : rows)
  {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  return out.str();
}

CheckResult CheckResult::make(std::string name, std::string anchor, double slack, double tolerance)
{
  CheckResult r;
  r.name = std::move(name);
  r.anchor = std::move(anchor);
  r.measured_slack = slack;
  r.tolerance = tolerance;
  r.finalize();
  return r;
}

void CheckResult::finalize()
{
  pass = !std::isnan(measured_slack) && !std::isnan(tolerance) && measured_slack <= tolerance;
}

void CheckResult::set(const std::string &key, double value) { context[key] = format_double(value); }
void CheckResult::set(const std::string &key, const std::string &value) { context[key] = value; }
void CheckResult::set_integer(const std::string &key, long long value) { context[key] = std::to_string(value); }
void CheckResult::set(const std::string &key, bool value) { context[key] = value ? "true" : "false"; }

} // namespace ricci
