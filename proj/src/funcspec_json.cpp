#include "freeito/funcspec_json.hpp"

#include <cmath>

#include "freeito/error.hpp"

namespace freeito {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

double number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(where, "must be finite");
  return x;
}

Complex complex_literal(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return {number(j, where), 0.0};
  if (!j.is_array() || j.size() != 2) fail(where, "expected [re, im]");
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where + "." + key, "missing required field");
  return j.at(key);
}

double param(const nlohmann::json& j, const char* key, const std::string& where,
             std::optional<double> fallback = std::nullopt) {
  const std::string path = where + ".params." + key;
  if (j.contains("params") && j["params"].is_object() && j["params"].contains(key))
    return number(j["params"][key], path);
  if (fallback) return *fallback;
  fail(path, "missing required field");
}

}  // namespace

const std::vector<std::string>& builtin_function_names() {
  static const std::vector<std::string> names{"log_shift", "exp", "power"};
  return names;
}

FunctionSpec function_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto& type = field(j, "type", where);
  if (!type.is_string()) fail(where + ".type", "expected a string");
  const auto t = type.get<std::string>();

  if (t == "polynomial") {
    const auto& c = field(j, "coeffs", where);
    if (!c.is_array() || c.empty()) fail(where + ".coeffs", "expected a nonempty array");
    std::vector<Complex> coeffs;
    for (std::size_t i = 0; i < c.size(); ++i)
      coeffs.push_back(complex_literal(c[i], where + ".coeffs[" + std::to_string(i) + "]"));
    return polynomial(std::move(coeffs));
  }
  if (t == "fourier") {
    const auto& a = field(j, "atoms", where);
    if (!a.is_array()) fail(where + ".atoms", "expected an array");
    std::vector<FourierAtom> atoms;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = where + ".atoms[" + std::to_string(i) + "]";
      atoms.push_back({complex_literal(field(a[i], "c", p), p + ".c"), number(field(a[i], "xi", p), p + ".xi")});
    }
    return fourier(std::move(atoms));
  }
  if (t == "builtin") {
    const auto& n = field(j, "name", where);
    if (!n.is_string()) fail(where + ".name", "expected a string");
    const auto name = n.get<std::string>();
    try {
      if (name == "log_shift") return log_shift(param(j, "eps", where));
      if (name == "exp") return exp_fn(param(j, "rate", where, 1.0));
      if (name == "power") return power_fn(param(j, "p", where));
    } catch (const InvalidArgument& e) {
      fail(where + ".params", e.what());
    }
    fail(where + ".name", "unknown builtin function '" + name + "'");
  }
  fail(where + ".type", "unknown function type '" + t + "'");
}

}  // namespace freeito
