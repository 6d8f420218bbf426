#pragma once

// Batch experiment runner: a flat key=value configuration, seeded replica
// generation, and CSV/JSON emission with a manifest beside every output.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stochlie/acceptance.hpp"
#include "stochlie/campbell.hpp"
#include "stochlie/martingale.hpp"

namespace stochlie {

enum class Command { Exp, Log, Roundtrip, Campbell, MartingaleTest, UTable, Convergence };
enum class ConnectionKind { BiInvariant, LeviCivita };
enum class OutputFormat { Csv, Json };
enum class DriverKind { Brownian, Drift };
enum class Scheme { Ito, Strat };
enum class UTableSource { Oracle, ClosedForm };

std::string_view to_string(Command c);
std::string_view to_string(ConnectionKind c);
std::string_view to_string(OutputFormat f);
std::string_view to_string(DriverKind d);
std::string_view to_string(Scheme s);
std::string_view to_string(UTableSource s);

struct ExperimentConfig {
  Command command = Command::Roundtrip;
  GroupId group = GroupId::SE3;
  ConnectionKind connection = ConnectionKind::LeviCivita;
  double lambda = 1.0;
  /// Grid: any two of horizon, dt and steps fix the third; horizon defaults
  /// to 1 and steps to 1000 when neither dt nor steps is given.
  std::optional<double> horizon;
  std::optional<double> dt;
  std::optional<int> steps;
  int replicas = 64;
  std::uint64_t seed = 42;
  /// n x n CSV file; empty means the identity.
  std::string covariance;
  /// Output file; empty writes to standard output without a manifest.
  std::string out;
  OutputFormat format = OutputFormat::Csv;
  std::vector<double> dts{4e-3, 2e-3, 1e-3};
  DriverKind driver = DriverKind::Brownian;
  Scheme scheme = Scheme::Ito;
  /// Drift vector for the drift driver; empty means the first basis vector.
  std::vector<double> drift;
  int buckets = 20;
  /// Fraction of (bucket, component) cells that must sit inside the z band.
  double significance = 0.95;
  double z_band = 4.0;
  AdRule rule = AdRule::Midpoint;
  /// Group-path CSV consumed by `log`; empty generates paths as `exp` would.
  std::string input;
  UTableSource source = UTableSource::Oracle;

  /// Throws a usage error on out-of-range values.
  void validate() const;
  TimeGrid grid() const;

  /// key=value lines in a fixed order; unset optionals are omitted.
  std::string serialize() const;
  static ExperimentConfig parse(std::string_view text);
  /// Applies one key=value setting; throws a usage error on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

Command parse_command(std::string_view text);

/// 0 ok, 2 usage, 3 precondition, 4 numerical.
int exit_code(ErrorKind kind);

/// Loads an n x n comma-separated covariance and checks it is SPD.
AlgMat load_covariance(const std::string& path, int n);

/// Runs the experiment and writes its artifacts. Throws stochlie::Error.
/// Outputs depend only on the config, never on `workers`.
void execute(const ExperimentConfig& config, int workers, std::ostream& stdout_sink);

/// execute() with errors mapped to exit codes and reported on `err`.
int run(const ExperimentConfig& config, int workers, std::ostream& stdout_sink, std::ostream& err);

struct RegressionSummary {
  std::vector<acceptance::CriterionResult> results;
  std::string results_file;
  bool all_passed() const;
};

/// Runs every acceptance criterion with pinned seeds and writes
/// regression_results.json into out_dir, which must already exist.
RegressionSummary regression_suite(const std::string& out_dir, const acceptance::Options& options = {});

}  // namespace stochlie
