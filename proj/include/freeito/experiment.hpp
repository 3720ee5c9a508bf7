#pragma once

// Config-driven experiment runner behind the command-line tool.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "freeito/verify.hpp"

namespace freeito {

struct ExperimentConfig {
  std::string experiment;
  int n = 0;
  double T = 0.0;
  int steps = 0;
  std::vector<int> steps_list;
  int paths = 1;
  std::uint64_t seed = 0;
  nlohmann::json function;
  nlohmann::json process;
  nlohmann::json process2;  // qcov: second process sharing the drivers (default: process)
  nlohmann::json weight;    // qcov: list of {"a","b","c"} matrices (default: I⊗I⊗I)
  double eps = 0.1;
  Complex lambda{0.0, 0.0};
  std::optional<double> final_tolerance;
  std::optional<double> decrease_factor;
  std::optional<double> tolerance;
  std::string output;
  std::string format = "csv";
  int threads = 0;
};

const std::vector<std::string>& experiment_names();

// Validates field types and experiment-specific requirements. Throws
// ConfigError with the offending field in the message.
ExperimentConfig parse_config(const nlohmann::json& j);
// Reads and parses a JSON file; syntax errors report the line number.
ExperimentConfig load_config(const std::string& path);

VerificationReport run_experiment(const ExperimentConfig& cfg);

// Writes the report in cfg.format to cfg.output.
void write_report(const VerificationReport& rep, const ExperimentConfig& cfg);

// One line per resolution plus a final verdict line.
std::string summary_lines(const VerificationReport& rep);

}  // namespace freeito
