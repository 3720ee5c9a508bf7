#include "freeito/itoproc_json.hpp"

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
  if (!j.is_array() || j.size() != 2) fail(where, "expected a number or [re, im]");
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

int integer(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

bool boolean(const nlohmann::json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected true or false");
  return j.get<bool>();
}

const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(where + "." + key, "missing required field");
  return j.at(key);
}

}  // namespace

const std::vector<std::string>& builtin_process_names() {
  static const std::vector<std::string> names{"hermitian_bm", "free_mult_bm", "modulus_squared", "custom_linear"};
  return names;
}

ComplexMatrix matrix_from_json(const nlohmann::json& j, int n, const std::string& where) {
  if (j.is_number()) return number(j, where) * ComplexMatrix::identity(n);
  if (!j.is_array() || static_cast<int>(j.size()) != n) fail(where, "expected " + std::to_string(n) + " rows");
  ComplexMatrix m(n);
  for (int r = 0; r < n; ++r) {
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != n) fail(rw, "expected " + std::to_string(n) + " entries");
    for (int c = 0; c < n; ++c) m(r, c) = complex_literal(j[r][c], rw + "[" + std::to_string(c) + "]");
  }
  return m;
}

ItoProcessSpec process_from_json(const nlohmann::json& j, int n, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto& type = field(j, "type", where);
  if (!type.is_string()) fail(where + ".type", "expected a string");
  const auto t = type.get<std::string>();

  auto optional_matrix = [&](const char* key) -> std::optional<ComplexMatrix> {
    if (!j.contains(key)) return std::nullopt;
    return matrix_from_json(j[key], n, where + "." + key);
  };

  try {
    if (t == "hermitian_bm") {
      const int drivers = j.contains("drivers") ? integer(j["drivers"], where + ".drivers") : 1;
      const int driver = j.contains("driver") ? integer(j["driver"], where + ".driver") : 0;
      if (drivers < 1) fail(where + ".drivers", "must be positive");
      if (driver < 0 || driver >= drivers) fail(where + ".driver", "must lie in [0, drivers)");
      return hermitian_bm(n, drivers, driver, optional_matrix("initial"));
    }
    if (t == "free_mult_bm") {
      return free_mult_bm(optional_matrix("initial").value_or(ComplexMatrix::identity(n)));
    }
    if (t == "modulus_squared") {
      const Complex lambda = complex_literal(field(j, "lambda", where), where + ".lambda");
      ModulusScheme scheme = ModulusScheme::Exact;
      if (j.contains("scheme")) {
        const auto& s = j["scheme"];
        if (s == "exact")
          scheme = ModulusScheme::Exact;
        else if (s == "euler")
          scheme = ModulusScheme::Euler;
        else
          fail(where + ".scheme", "expected \"exact\" or \"euler\"");
      }
      const auto g = free_mult_bm(optional_matrix("initial").value_or(ComplexMatrix::identity(n)));
      return modulus_squared(g, lambda, scheme);
    }
    if (t == "custom_linear") {
      const auto& diff = field(j, "diffusion", where);
      if (!diff.is_array()) fail(where + ".diffusion", "expected one term list per driver");
      std::vector<TensorSumOperator> us;
      for (std::size_t i = 0; i < diff.size(); ++i) {
        const std::string di = where + ".diffusion[" + std::to_string(i) + "]";
        if (!diff[i].is_array()) fail(di, "expected an array of {\"a\":..., \"b\":...} terms");
        TensorSumOperator u(n);
        for (std::size_t k = 0; k < diff[i].size(); ++k) {
          const std::string dk = di + "[" + std::to_string(k) + "]";
          u.add(matrix_from_json(field(diff[i][k], "a", dk), n, dk + ".a"),
                matrix_from_json(field(diff[i][k], "b", dk), n, dk + ".b"));
        }
        us.push_back(std::move(u));
      }
      const bool sa = j.contains("self_adjoint") && boolean(j["self_adjoint"], where + ".self_adjoint");
      auto spec = custom_linear(optional_matrix("initial").value_or(ComplexMatrix(n)), std::move(us),
                                optional_matrix("drift"), sa);
      validate_spec(spec);
      return spec;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(where, e.what());
  }
  fail(where + ".type", "unknown process type '" + t + "'");
}

}  // namespace freeito
