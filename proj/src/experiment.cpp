#include "freeito/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "freeito/error.hpp"
#include "freeito/funcspec_json.hpp"
#include "freeito/itoproc_json.hpp"
#include "freeito/parallel.hpp"

namespace freeito {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

bool has(const nlohmann::json& j, const char* key) { return j.contains(key) && !j[key].is_null(); }

void require(const nlohmann::json& j, const char* key) {
  if (!has(j, key)) fail(key, "missing required field");
}

int positive_int(const nlohmann::json& j, const char* key) {
  const auto& v = j[key];
  if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 1000000000)
    fail(key, "expected a positive integer");
  return v.get<int>();
}

double positive_number(const nlohmann::json& j, const char* key) {
  const auto& v = j[key];
  if (!v.is_number() || !std::isfinite(v.get<double>()) || !(v.get<double>() > 0.0))
    fail(key, "expected a positive number");
  return v.get<double>();
}

bool needs(const std::string& exp, std::initializer_list<const char*> list) {
  return std::find(list.begin(), list.end(), exp) != list.end();
}

TripleTensorSum weight_from_json(const nlohmann::json& j, int n) {
  if (j.is_null()) return TripleTensorSum::identity(n);
  if (!j.is_array() || j.empty()) fail("weight", "expected a nonempty array of {\"a\",\"b\",\"c\"} terms");
  TripleTensorSum w(n);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = "weight[" + std::to_string(i) + "]";
    for (const char* k : {"a", "b", "c"})
      if (!j[i].is_object() || !j[i].contains(k)) fail(p + "." + k, "missing required field");
    w.add(matrix_from_json(j[i]["a"], n, p + ".a"), matrix_from_json(j[i]["b"], n, p + ".b"),
          matrix_from_json(j[i]["c"], n, p + ".c"));
  }
  return w;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"ito-residual", "qcov", "traced", "semicircle", "dhk-log", "simulate"};
  return names;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) fail("config", "expected a JSON object");
  ExperimentConfig c;
  require(j, "experiment");
  if (!j["experiment"].is_string()) fail("experiment", "expected a string");
  c.experiment = j["experiment"].get<std::string>();
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    fail("experiment", "unknown experiment '" + c.experiment + "'");
  const std::string& e = c.experiment;

  require(j, "N");
  c.n = positive_int(j, "N");
  if (c.n > kMaxDim) fail("N", "must not exceed " + std::to_string(kMaxDim));
  require(j, "T");
  c.T = positive_number(j, "T");

  if (needs(e, {"traced", "dhk-log", "simulate"})) {
    require(j, "steps");
    c.steps = positive_int(j, "steps");
  }
  if (needs(e, {"ito-residual", "qcov"})) {
    require(j, "steps_list");
    const auto& s = j["steps_list"];
    if (!s.is_array() || s.empty()) fail("steps_list", "expected a nonempty array of positive integers");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number_integer() || s[i].get<long long>() < 1)
        fail("steps_list[" + std::to_string(i) + "]", "expected a positive integer");
      c.steps_list.push_back(s[i].get<int>());
    }
    const int finest = *std::max_element(c.steps_list.begin(), c.steps_list.end());
    for (int v : c.steps_list) {
      const int r = finest / v;
      if (finest % v != 0 || (r & (r - 1)) != 0)
        fail("steps_list", "entries must differ from the largest by powers of two");
    }
  }
  if (e != "semicircle") {
    require(j, "paths");
    c.paths = positive_int(j, "paths");
  }
  if (has(j, "seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      fail("seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (needs(e, {"ito-residual", "traced"})) {
    require(j, "function");
    c.function = j["function"];
    function_from_json(c.function, "function");
  }
  if (needs(e, {"ito-residual", "qcov", "traced", "simulate"})) {
    require(j, "process");
    c.process = j["process"];
    process_from_json(c.process, c.n, "process");
  }
  if (e == "qcov") {
    c.process2 = has(j, "process2") ? j["process2"] : c.process;
    process_from_json(c.process2, c.n, "process2");
    if (has(j, "weight")) c.weight = j["weight"];
    weight_from_json(c.weight, c.n);
  }
  if (e == "semicircle" && c.n < 50) fail("N", "semicircle needs N >= 50");
  if (e == "dhk-log") {
    if (has(j, "eps")) c.eps = positive_number(j, "eps");
    if (has(j, "lambda")) {
      const auto& l = j["lambda"];
      if (l.is_number())
        c.lambda = {l.get<double>(), 0.0};
      else if (l.is_array() && l.size() == 2 && l[0].is_number() && l[1].is_number())
        c.lambda = {l[0].get<double>(), l[1].get<double>()};
      else
        fail("lambda", "expected a number or [re, im]");
    }
  }
  if (has(j, "final_tolerance")) c.final_tolerance = positive_number(j, "final_tolerance");
  if (has(j, "decrease_factor")) c.decrease_factor = positive_number(j, "decrease_factor");
  if (has(j, "tolerance")) c.tolerance = positive_number(j, "tolerance");
  if (has(j, "format")) {
    if (j["format"] != "csv" && j["format"] != "json") fail("format", "expected \"csv\" or \"json\"");
    c.format = j["format"].get<std::string>();
  }
  if (has(j, "output")) {
    if (!j["output"].is_string() || j["output"].get<std::string>().empty()) fail("output", "expected a file path");
    c.output = j["output"].get<std::string>();
  } else {
    c.output = e + "_report." + c.format;
  }
  if (has(j, "threads")) c.threads = positive_int(j, "threads");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ConfigError(path + ":" + std::to_string(line) + ": JSON syntax error: " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

VerificationReport run_experiment(const ExperimentConfig& c) {
  const MonteCarlo mc{c.paths, c.seed, c.threads};
  ConvergenceCriteria crit;
  if (c.final_tolerance) crit.final_tolerance = *c.final_tolerance;
  if (c.decrease_factor) crit.decrease_factor = *c.decrease_factor;
  const std::string& e = c.experiment;
  VerificationReport rep;

  if (e == "ito-residual") {
    rep = check_ito_residual(function_from_json(c.function), process_from_json(c.process, c.n), c.T, c.steps_list, mc,
                             crit);
  } else if (e == "qcov") {
    rep = check_quadratic_covariation(weight_from_json(c.weight, c.n), process_from_json(c.process, c.n),
                                      process_from_json(c.process2, c.n, "process2"), c.T, c.steps_list, mc, crit);
  } else if (e == "traced") {
    TracedCriteria tc;
    if (c.tolerance) tc.path_tolerance = *c.tolerance;
    rep = check_traced_formula(function_from_json(c.function), process_from_json(c.process, c.n), c.T, c.steps, mc, tc);
  } else if (e == "semicircle") {
    rep = check_semicircle(c.n, c.T, c.seed);
  } else if (e == "dhk-log") {
    rep = check_dhk_log_identity(c.n, c.T, c.steps, mc, c.eps, c.lambda, c.tolerance.value_or(0.10));
  } else {
    // simulate: E tr(M(T)* M(T)) over independent paths.
    const auto spec = process_from_json(c.process, c.n);
    std::vector<double> sq(static_cast<std::size_t>(c.paths)), tr(sq.size()), defect(sq.size());
    parallel_for(sq.size(), c.threads > 0 ? c.threads : default_threads(), [&](std::size_t p) {
      RngStream rng(c.seed, p);
      const auto path = simulate(spec, c.T, c.steps, rng);
      const auto& m = path.states.back();
      sq[p] = normalized_trace(m.adjoint() * m).real();
      tr[p] = normalized_trace(m).real();
      defect[p] = path.max_symmetrization_defect;
    });
    double mean = 0.0, mean_tr = 0.0, var = 0.0;
    for (std::size_t p = 0; p < sq.size(); ++p) {
      mean += sq[p];
      mean_tr += tr[p];
    }
    mean /= static_cast<double>(sq.size());
    mean_tr /= static_cast<double>(sq.size());
    for (double v : sq) var += (v - mean) * (v - mean);
    const double se = sq.size() > 1 ? std::sqrt(var / static_cast<double>(sq.size() - 1) / sq.size()) : 0.0;
    rep.experiment = "simulate";
    rep.parameters = {{"N", c.n}, {"T", c.T}, {"steps", c.steps}, {"paths", c.paths}, {"seed", c.seed},
                      {"process", spec.name}};
    rep.rows.push_back({c.steps, mean, se, std::numeric_limits<double>::infinity(), false});
    rep.diagnostics["statistic"] = "tr(M(T)* M(T))";
    rep.diagnostics["mean_trace_M_T"] = mean_tr;
    rep.diagnostics["max_symmetrization_defect"] = *std::max_element(defect.begin(), defect.end());
    rep.finalize();
  }
  if (!c.function.is_null()) rep.parameters["function_spec"] = c.function;
  if (!c.process.is_null()) rep.parameters["process_spec"] = c.process;
  return rep;
}

void write_report(const VerificationReport& rep, const ExperimentConfig& c) {
  std::ofstream out(c.output, std::ios::binary);
  if (!out) throw Error("cannot write report to " + c.output);
  if (c.format == "json")
    out << to_json(rep).dump(2) << "\n";
  else
    out << to_csv(rep);
  if (!out) throw Error("failed writing report to " + c.output);
}

std::string summary_lines(const VerificationReport& rep) {
  std::string s;
  for (const auto& r : rep.rows)
    s += rep.experiment + " steps=" + std::to_string(r.steps) + " mean=" + fmt(r.mean) + " stderr=" + fmt(r.stderr_) +
         " tolerance=" + fmt(r.tolerance) + " " + (r.pass ? "PASS" : "FAIL") + "\n";
  for (const auto& ch : rep.checks)
    s += rep.experiment + " " + ch.name + "=" + fmt(ch.value) + " tolerance=" + fmt(ch.tolerance) + " " +
         (ch.pass ? "PASS" : "FAIL") + "\n";
  s += rep.experiment + (rep.pass ? " PASS" : " FAIL") + "\n";
  return s;
}

}  // namespace freeito
