#include <cmath>
#include <cstdio>
#include <string>

#include "freeito/verify.hpp"

namespace freeito {

namespace {

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

nlohmann::json bound(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"steps", row.steps}, {"mean", row.mean}, {"stderr", row.stderr_},
                    {"tolerance", bound(row.tolerance)}, {"pass", row.pass}});
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", bound(c.tolerance)}, {"pass", c.pass}});
  return {{"experiment", r.experiment}, {"parameters", r.parameters}, {"rows", rows},
          {"checks", checks},           {"diagnostics", r.diagnostics}, {"pass", r.pass}};
}

std::string to_csv(const VerificationReport& r) {
  std::string out = "steps,mean,stderr,tolerance,pass\n";
  for (const auto& row : r.rows)
    out += std::to_string(row.steps) + "," + num(row.mean) + "," + num(row.stderr_) + "," + num(row.tolerance) + "," +
           (row.pass ? "true" : "false") + "\n";
  return out;
}

}  // namespace freeito
