// Command-line front end for the experiment runner.
//
//   stochlie <command> [--flag value ...]
//
// Flags override values loaded with --config, which override defaults.
// Exit status: 0 ok, 1 regression failure, 2 usage, 3 precondition, 4 numerical.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "stochlie/experiment.hpp"

namespace {

// flag name -> configuration key
const std::pair<const char*, const char*> kFlags[] = {
    {"--group", "group"},
    {"--connection", "connection"},
    {"--lambda", "lambda"},
    {"--horizon", "horizon"},
    {"--dt", "dt"},
    {"--steps", "steps"},
    {"--replicas", "replicas"},
    {"--seed", "seed"},
    {"--out", "out"},
    {"--format", "format"},
    {"--dts", "dts"},
    {"--driver", "driver"},
    {"--scheme", "scheme"},
    {"--drift", "drift"},
    {"--cov", "covariance"},
    {"--buckets", "buckets"},
    {"--significance", "significance"},
    {"--z-band", "z_band"},
    {"--rule", "rule"},
    {"--in", "input"},
    {"--source", "source"},
};

const char* help_for(const std::string& key) {
  static const std::map<std::string, const char*> help{
      {"group", "so3, se2, se3, e11, n3 or sl2r"},
      {"connection", "biinvariant or levicivita"},
      {"lambda", "metric scale of the translation/nilpotent directions"},
      {"horizon", "time horizon T (default 1)"},
      {"dt", "time step"},
      {"steps", "number of time steps"},
      {"replicas", "number of independent replicas"},
      {"seed", "64-bit base seed"},
      {"out", "output file (regress: output directory); stdout if omitted"},
      {"format", "csv or json"},
      {"dts", "comma-separated step sizes for ladders"},
      {"driver", "bm (Brownian) or drift (drift plus diffusion)"},
      {"scheme", "ito or strat"},
      {"drift", "comma-separated drift vector for --driver drift"},
      {"covariance", "n x n CSV covariance of the driver (default identity)"},
      {"buckets", "time buckets of the drift test"},
      {"significance", "fraction of drift-test cells that must pass"},
      {"z_band", "per-cell |z| band of the drift test"},
      {"rule", "adjoint quadrature rule: midpoint or left"},
      {"input", "group-path CSV to take the logarithm of"},
      {"source", "u-table source: oracle or closed"},
  };
  return help.at(key);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic exponentials and logarithms on matrix Lie groups"};
  app.set_version_flag("--version", "stochlie 1.0");

  std::string command;
  std::string config_file;
  int workers = 1;
  app.add_option("command", command,
                 "exp, log, roundtrip, campbell, martingale-test, u-table, convergence or regress")
      ->required();
  app.add_option("--config", config_file, "key=value configuration file");
  app.add_option("--workers", workers, "replica worker threads (outputs do not depend on it)")
      ->check(CLI::PositiveNumber);

  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& [flag, key] : kFlags) options[key] = app.add_option(flag, values[key], help_for(key));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (command == "regress") {
      stochlie::acceptance::Options opts;
      opts.workers = workers;
      if (options["seed"]->count() > 0) stochlie::ExperimentConfig{}.set("seed", values["seed"]);
      const auto summary = stochlie::regression_suite(values["out"], opts);
      for (const auto& r : summary.results) std::cout << stochlie::acceptance::format_line(r) << '\n';
      std::cout << "results: " << summary.results_file << '\n';
      return summary.all_passed() ? 0 : 1;
    }

    stochlie::ExperimentConfig config;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw stochlie::Error(stochlie::ErrorKind::Usage, "cannot open config '" + config_file + "'");
      std::stringstream text;
      text << in.rdbuf();
      config = stochlie::ExperimentConfig::parse(text.str());
    }
    config.command = stochlie::parse_command(command);
    for (const auto& [flag, key] : kFlags) {
      if (options[key]->count() > 0) config.set(key, values[key]);
    }
    return stochlie::run(config, workers, std::cout, std::cerr);
  } catch (const stochlie::Error& e) {
    std::cerr << "stochlie: " << e.what() << '\n';
    return stochlie::exit_code(e.kind());
  }
}
