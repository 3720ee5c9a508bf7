// freeito run <config.json> [--seed S] [--out PATH] [--threads K]

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "freeito/error.hpp"
#include "freeito/experiment.hpp"
#include "freeito/funcspec_json.hpp"
#include "freeito/itoproc_json.hpp"
#include "freeito/parallel.hpp"

namespace {

std::string joined(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

std::string catalog() {
  return "Experiments: " + joined(freeito::experiment_names()) +
         "\nBuiltin functions: " + joined(freeito::builtin_function_names()) +
         " (also \"polynomial\" and \"fourier\" function types)" +
         "\nBuiltin processes: " + joined(freeito::builtin_process_names()) +
         "\nExit status: 0 pass, 1 acceptance failure or runtime error, 2 configuration error."
         "\nFREEITO_THREADS bounds the worker count when --threads is absent.";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-N free stochastic calculus: matrix Itô formulas checked by simulation", "freeito"};
  app.footer(catalog());
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config file");
  run->footer(catalog());
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out, "Override the report path");
  run->add_option("--threads", threads, "Worker thread bound")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto cfg = freeito::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out) cfg.output = *out;
    if (threads) cfg.threads = *threads;
    freeito::set_default_threads(cfg.threads);

    const auto rep = freeito::run_experiment(cfg);
    freeito::write_report(rep, cfg);
    std::cout << freeito::summary_lines(rep);
    return rep.pass ? 0 : 1;
  } catch (const freeito::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
