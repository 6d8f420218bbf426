#include "stochlie/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace stochlie {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void usage(const std::string& what) { throw Error(ErrorKind::Usage, what); }

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<std::pair<std::string_view, Enum>, N>& names,
                const char* what) {
  for (const auto& [name, value] : names) {
    if (name == text) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  usage(std::string("unknown ") + what + " '" + std::string(text) + "' (expected one of " + allowed + ")");
}

constexpr std::array<std::pair<std::string_view, Command>, 7> kCommands{{
    {"exp", Command::Exp},
    {"log", Command::Log},
    {"roundtrip", Command::Roundtrip},
    {"campbell", Command::Campbell},
    {"martingale-test", Command::MartingaleTest},
    {"u-table", Command::UTable},
    {"convergence", Command::Convergence},
}};
constexpr std::array<std::pair<std::string_view, ConnectionKind>, 2> kConnections{{
    {"biinvariant", ConnectionKind::BiInvariant},
    {"levicivita", ConnectionKind::LeviCivita},
}};
constexpr std::array<std::pair<std::string_view, OutputFormat>, 2> kFormats{{
    {"csv", OutputFormat::Csv},
    {"json", OutputFormat::Json},
}};
constexpr std::array<std::pair<std::string_view, DriverKind>, 2> kDrivers{{
    {"bm", DriverKind::Brownian},
    {"drift", DriverKind::Drift},
}};
constexpr std::array<std::pair<std::string_view, Scheme>, 2> kSchemes{{
    {"ito", Scheme::Ito},
    {"strat", Scheme::Strat},
}};
constexpr std::array<std::pair<std::string_view, UTableSource>, 2> kSources{{
    {"oracle", UTableSource::Oracle},
    {"closed", UTableSource::ClosedForm},
}};

template <typename Enum, std::size_t N>
std::string_view name_of(Enum value, const std::array<std::pair<std::string_view, Enum>, N>& names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string copy(trim(text));
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(v)) {
    usage(std::string(key) + ": '" + copy + "' is not a finite number");
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  text = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    usage(std::string(key) + ": '" + std::string(text) + "' is not an integer in range");
  }
  return v;
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(parse_double(key, text.substr(pos, end - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // no "-0" in the output
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

std::string_view to_string(Command c) { return name_of(c, kCommands); }
std::string_view to_string(ConnectionKind c) { return name_of(c, kConnections); }
std::string_view to_string(OutputFormat f) { return name_of(f, kFormats); }
std::string_view to_string(DriverKind d) { return name_of(d, kDrivers); }
std::string_view to_string(Scheme s) { return name_of(s, kSchemes); }
std::string_view to_string(UTableSource s) { return name_of(s, kSources); }

Command parse_command(std::string_view text) { return parse_enum(text, kCommands, "command"); }

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "command") {
    command = parse_command(value);
  } else if (key == "group") {
    group = parse_group(value);
  } else if (key == "connection") {
    connection = parse_enum(value, kConnections, "connection");
  } else if (key == "lambda") {
    lambda = parse_double(key, value);
  } else if (key == "horizon") {
    horizon = parse_double(key, value);
  } else if (key == "dt") {
    dt = parse_double(key, value);
  } else if (key == "steps") {
    steps = parse_int<int>(key, value);
  } else if (key == "replicas") {
    replicas = parse_int<int>(key, value);
  } else if (key == "seed") {
    seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "covariance") {
    covariance = std::string(value);
  } else if (key == "out") {
    out = std::string(value);
  } else if (key == "format") {
    format = parse_enum(value, kFormats, "format");
  } else if (key == "dts") {
    dts = parse_list(key, value);
  } else if (key == "driver") {
    driver = parse_enum(value, kDrivers, "driver");
  } else if (key == "scheme") {
    scheme = parse_enum(value, kSchemes, "scheme");
  } else if (key == "drift") {
    drift = parse_list(key, value);
  } else if (key == "buckets") {
    buckets = parse_int<int>(key, value);
  } else if (key == "significance") {
    significance = parse_double(key, value);
  } else if (key == "z_band") {
    z_band = parse_double(key, value);
  } else if (key == "rule") {
    try {
      rule = parse_ad_rule(value);
    } catch (const Error& e) {
      usage(e.what());
    }
  } else if (key == "input") {
    input = std::string(value);
  } else if (key == "source") {
    source = parse_enum(value, kSources, "u-table source");
  } else {
    usage("unknown configuration key '" + std::string(key) + "'");
  }
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  os << "command=" << to_string(command) << '\n'
     << "group=" << group_name(group) << '\n'
     << "connection=" << to_string(connection) << '\n'
     << "lambda=" << num(lambda) << '\n';
  if (horizon) os << "horizon=" << num(*horizon) << '\n';
  if (dt) os << "dt=" << num(*dt) << '\n';
  if (steps) os << "steps=" << *steps << '\n';
  os << "replicas=" << replicas << '\n'
     << "seed=" << seed << '\n'
     << "covariance=" << covariance << '\n'
     << "out=" << out << '\n'
     << "format=" << to_string(format) << '\n'
     << "dts=" << join(dts) << '\n'
     << "driver=" << to_string(driver) << '\n'
     << "scheme=" << to_string(scheme) << '\n'
     << "drift=" << join(drift) << '\n'
     << "buckets=" << buckets << '\n'
     << "significance=" << num(significance) << '\n'
     << "z_band=" << num(z_band) << '\n'
     << "rule=" << to_string(rule) << '\n'
     << "input=" << input << '\n'
     << "source=" << to_string(source) << '\n';
  return os.str();
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig config;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) usage("config line " + std::to_string(line_no) + ": expected key=value");
    config.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return config;
}

TimeGrid ExperimentConfig::grid() const {
  double t = horizon.value_or(1.0);
  int n = 1000;
  if (dt && !(*dt > 0.0)) usage("dt must be positive");
  if (steps && *steps < 1) usage("steps must be at least 1");
  if (horizon && !(*horizon > 0.0)) usage("horizon must be positive");
  if (dt && steps) {
    n = *steps;
    t = *dt * n;
    if (horizon && std::abs(*horizon - t) > 1e-12 * std::max(1.0, t)) {
      usage("horizon, dt and steps are inconsistent");
    }
  } else if (steps) {
    n = *steps;
  } else if (dt) {
    const double ratio = t / *dt;
    n = static_cast<int>(std::lround(ratio));
    if (n < 1 || std::abs(ratio - n) > 1e-9 * ratio) usage("dt does not divide the horizon");
  }
  return TimeGrid(t, n);
}

void ExperimentConfig::validate() const {
  if (!(lambda > 0.0)) usage("lambda must be positive");
  if (replicas < 1) usage("replicas must be at least 1");
  if (buckets < 1) usage("buckets must be at least 1");
  if (!(significance > 0.0 && significance <= 1.0)) usage("significance must lie in (0, 1]");
  if (!(z_band > 0.0)) usage("z_band must be positive");
  if (dts.empty()) usage("dts must list at least one step size");
  for (double d : dts) {
    if (!(d > 0.0)) usage("dts entries must be positive");
  }
  if (!drift.empty() && static_cast<int>(drift.size()) != stochlie::group(group).algebra_dim()) {
    usage("drift has " + std::to_string(drift.size()) + " entries, the algebra has " +
          std::to_string(stochlie::group(group).algebra_dim()));
  }
  (void)grid();
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::Dimension:
    case ErrorKind::Unsupported:
      return 2;
    case ErrorKind::Precondition:
    case ErrorKind::Power:
    case ErrorKind::Metric:
    case ErrorKind::Membership:
    case ErrorKind::GroupMismatch:
    case ErrorKind::GridMismatch:
      return 3;
    case ErrorKind::Singularity:
    case ErrorKind::Range:
    case ErrorKind::IntegratorDrift:
    case ErrorKind::Closure:
    case ErrorKind::NotInAlgebra:
      return 4;
  }
  return 4;
}

AlgMat load_covariance(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) usage("cannot open covariance file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || trim(line).front() == '#') continue;
    rows.push_back(parse_list("covariance", line));
  }
  if (static_cast<int>(rows.size()) != n) {
    usage("covariance file has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(n));
  }
  AlgMat cov(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) {
      usage("covariance row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
            " entries, expected " + std::to_string(n));
    }
    for (int j = 0; j < n; ++j) cov(i, j) = rows[i][j];
  }
  (void)cholesky_factor(cov);
  return cov;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

/// One artifact: written to the configured path (plus manifest) or to stdout.
class Artifacts {
 public:
  Artifacts(const ExperimentConfig& config, std::ostream& stdout_sink) : config_(config), stdout_(stdout_sink) {
    if (!config.out.empty()) {
      const fs::path parent = fs::path(config.out).parent_path();
      if (!parent.empty() && !fs::is_directory(parent)) {
        usage("output directory '" + parent.string() + "' does not exist");
      }
    }
  }

  /// suffix is appended to the output path; secondary artifacts are skipped
  /// when writing to stdout.
  void write(const std::string& content, const std::string& suffix = {}) {
    if (config_.out.empty()) {
      if (suffix.empty()) stdout_ << content;
      return;
    }
    const std::string path = config_.out + suffix;
    write_file(path, content);
    write_file(path + ".manifest", "# resolved configuration for " + fs::path(path).filename().string() + "\n" +
                                       resolved().serialize());
  }

 private:
  ExperimentConfig resolved() const {
    ExperimentConfig r = config_;
    const TimeGrid g = config_.grid();
    r.horizon = g.horizon;
    r.steps = g.steps;
    r.dt.reset();
    return r;
  }

  static void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) usage("cannot write '" + path + "'");
    out << content;
    if (!out) usage("failed writing '" + path + "'");
  }

  const ExperimentConfig& config_;
  std::ostream& stdout_;
};

ConnectionFunction make_alpha(const ExperimentConfig& config) {
  const GroupSpec& g = group(config.group);
  if (config.connection == ConnectionKind::BiInvariant) return alpha_biinvariant(g);
  return alpha_levi_civita(standard_metric(g, config.lambda));
}

AlgMat make_covariance(const ExperimentConfig& config) {
  const int n = group(config.group).algebra_dim();
  return config.covariance.empty() ? AlgMat(AlgMat::Identity(n, n)) : load_covariance(config.covariance, n);
}

AlgebraPath make_driver(const ExperimentConfig& config, const TimeGrid& grid, const AlgMat& cov, std::uint64_t seed) {
  const GroupSpec& g = group(config.group);
  if (config.driver == DriverKind::Brownian) return brownian_driver(g, grid, seed, cov);
  AlgVec b = AlgVec::Zero(g.algebra_dim());
  if (config.drift.empty()) {
    b[0] = 1.0;
  } else {
    for (int i = 0; i < b.size(); ++i) b[i] = config.drift[static_cast<std::size_t>(i)];
  }
  return drift_diffusion_driver(g, grid, seed, b, cholesky_factor(cov));
}

GroupPath exponentiate(const ExperimentConfig& config, const AlgebraPath& m, const ConnectionFunction& alpha) {
  return config.scheme == Scheme::Ito ? ito_exponential(m, alpha) : strat_exponential(m);
}

AlgebraPath logarithm(const ExperimentConfig& config, const GroupPath& x, const ConnectionFunction& alpha) {
  return config.scheme == Scheme::Ito ? ito_logarithm(x, alpha) : strat_logarithm(x);
}

std::vector<GroupPath> generate_group_paths(const ExperimentConfig& config, int workers) {
  const TimeGrid grid = config.grid();
  const ConnectionFunction alpha = make_alpha(config);
  const AlgMat cov = make_covariance(config);
  std::vector<GroupPath> paths(static_cast<std::size_t>(config.replicas));
  parallel_for(paths.size(), workers, [&](std::size_t r) {
    paths[r] = exponentiate(config, make_driver(config, grid, cov, derive_seed(config.seed, r)), alpha);
  });
  return paths;
}

std::string group_header(const GroupSpec& g) {
  std::string h = "replica,k,t";
  for (int i = 1; i <= g.matrix_dim(); ++i) {
    for (int j = 1; j <= g.matrix_dim(); ++j) h += ",m" + std::to_string(i) + std::to_string(j);
  }
  return h;
}

std::string algebra_header(int n, const char* lead = "replica,k,t") {
  std::string h = lead;
  for (int i = 1; i <= n; ++i) h += ",c" + std::to_string(i);
  return h;
}

std::string group_paths_csv(const std::vector<GroupPath>& paths, const GroupSpec& g) {
  std::string s = group_header(g) + '\n';
  for (std::size_t r = 0; r < paths.size(); ++r) {
    const PathMatrix c = paths[r].coordinates();
    for (int k = 0; k < c.rows(); ++k) {
      s += std::to_string(r) + ',' + std::to_string(k) + ',' + num(paths[r].grid.t(k));
      for (int j = 0; j < c.cols(); ++j) s += ',' + num(c(k, j));
      s += '\n';
    }
  }
  return s;
}

std::string algebra_paths_csv(const std::vector<AlgebraPath>& paths, int n) {
  std::string s = algebra_header(n) + '\n';
  for (std::size_t r = 0; r < paths.size(); ++r) {
    const PathMatrix& v = paths[r].values;
    for (int k = 0; k < v.rows(); ++k) {
      s += std::to_string(r) + ',' + std::to_string(k) + ',' + num(paths[r].grid.t(k));
      for (int j = 0; j < v.cols(); ++j) s += ',' + num(v(k, j));
      s += '\n';
    }
  }
  return s;
}

json rows_json(const PathMatrix& m) {
  json rows = json::array();
  for (int k = 0; k < m.rows(); ++k) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(k, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json header_json(const ExperimentConfig& config, std::string_view kind) {
  const TimeGrid grid = config.grid();
  return json{{"schema", 1},
              {"kind", kind},
              {"group", group_name(config.group)},
              {"horizon", grid.horizon},
              {"steps", grid.steps},
              {"seed", config.seed}};
}

std::string dump(const json& j) { return j.dump(2) + '\n'; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.emplace_back(trim(cell));
  return out;
}

/// Reads the CSV written by `exp`: replicas in order, each with k = 0..steps.
std::vector<GroupPath> read_group_paths(const std::string& path, const GroupSpec& g) {
  std::ifstream in(path);
  if (!in) usage("cannot open input '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || std::string(trim(line)) != group_header(g)) {
    usage("input '" + path + "' does not start with the header " + group_header(g));
  }
  const int m = g.matrix_dim();
  std::vector<std::vector<GroupMat>> values;
  std::vector<double> last_t;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != 3 + m * m) usage("input line " + std::to_string(line_no) + ": wrong column count");
    const auto r = parse_int<std::size_t>("replica", cells[0]);
    const auto k = parse_int<std::size_t>("k", cells[1]);
    if (r == values.size()) {
      values.emplace_back();
      last_t.push_back(0.0);
    }
    if (r + 1 != values.size() || k != values.back().size()) {
      usage("input line " + std::to_string(line_no) + ": replicas and steps must be contiguous and ordered");
    }
    GroupMat x(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) x(i, j) = parse_double("entry", cells[static_cast<std::size_t>(3 + i * m + j)]);
    }
    values.back().push_back(std::move(x));
    last_t.back() = parse_double("t", cells[2]);
  }
  if (values.empty()) usage("input '" + path + "' has no rows");
  const int steps = static_cast<int>(values[0].size()) - 1;
  std::vector<GroupPath> paths;
  for (std::size_t r = 0; r < values.size(); ++r) {
    if (steps < 1 || static_cast<int>(values[r].size()) - 1 != steps || last_t[r] != last_t[0]) {
      usage("input replicas must share one grid with at least one step");
    }
    paths.emplace_back(g, TimeGrid(last_t[r], steps), std::move(values[r]));
  }
  return paths;
}

void run_exp(const ExperimentConfig& config, int workers, Artifacts& out) {
  const GroupSpec& g = group(config.group);
  const auto paths = generate_group_paths(config, workers);
  if (config.format == OutputFormat::Csv) {
    out.write(group_paths_csv(paths, g));
    return;
  }
  json j = header_json(config, "group-paths");
  j["matrix_dim"] = g.matrix_dim();
  j["replicas"] = json::array();
  for (std::size_t r = 0; r < paths.size(); ++r) {
    j["replicas"].push_back({{"replica", r}, {"values", rows_json(paths[r].coordinates())}});
  }
  out.write(dump(j));
}

void run_log(const ExperimentConfig& config, int workers, Artifacts& out) {
  const GroupSpec& g = group(config.group);
  const ConnectionFunction alpha = make_alpha(config);
  const auto paths = config.input.empty() ? generate_group_paths(config, workers) : read_group_paths(config.input, g);
  std::vector<AlgebraPath> logs(paths.size());
  parallel_for(paths.size(), workers, [&](std::size_t r) { logs[r] = logarithm(config, paths[r], alpha); });
  if (config.format == OutputFormat::Csv) {
    out.write(algebra_paths_csv(logs, g.algebra_dim()));
    return;
  }
  json j = header_json(config, "algebra-paths");
  j["horizon"] = logs.front().grid.horizon;
  j["steps"] = logs.front().grid.steps;
  j["basis"] = g.basis_names();
  j["connection"] = alpha.label();
  j["replicas"] = json::array();
  for (std::size_t r = 0; r < logs.size(); ++r) {
    j["replicas"].push_back({{"replica", r}, {"values", rows_json(logs[r].values)}});
  }
  out.write(dump(j));
}

/// Terminal |log(exp(M)) - M| for each replica on one grid.
std::vector<double> round_trip_errors(const ExperimentConfig& config, const TimeGrid& grid, std::uint64_t level,
                                      int workers) {
  const ConnectionFunction alpha = make_alpha(config);
  const AlgMat cov = make_covariance(config);
  std::vector<double> err(static_cast<std::size_t>(config.replicas));
  parallel_for(err.size(), workers, [&](std::size_t r) {
    const AlgebraPath m = make_driver(config, grid, cov, derive_seed(config.seed, (level << 32) | r));
    const AlgebraPath back = logarithm(config, exponentiate(config, m, alpha), alpha);
    err[r] = (back.values.row(grid.steps) - m.values.row(grid.steps)).norm();
  });
  return err;
}

void run_roundtrip(const ExperimentConfig& config, int workers, Artifacts& out) {
  const auto err = round_trip_errors(config, config.grid(), 0, workers);
  if (config.format == OutputFormat::Csv) {
    std::string s = "replica,terminal_error\n";
    for (std::size_t r = 0; r < err.size(); ++r) s += std::to_string(r) + ',' + num(err[r]) + '\n';
    s += "mean," + num(mean_of(err)) + '\n';
    s += "se," + num(se_of(err)) + '\n';
    out.write(s);
    return;
  }
  json j = header_json(config, "roundtrip");
  j["connection"] = make_alpha(config).label();
  j["terminal_errors"] = err;
  j["mean"] = mean_of(err);
  j["se"] = se_of(err);
  out.write(dump(j));
}

void run_convergence(const ExperimentConfig& config, int workers, Artifacts& out) {
  const double horizon = config.horizon.value_or(1.0);
  struct Level {
    double dt;
    int steps;
    std::vector<double> err;
  };
  std::vector<Level> levels;
  for (std::size_t i = 0; i < config.dts.size(); ++i) {
    ExperimentConfig c = config;
    c.horizon = horizon;
    c.dt = config.dts[i];
    c.steps.reset();
    const TimeGrid grid = c.grid();
    levels.push_back({config.dts[i], grid.steps, round_trip_errors(config, grid, i, workers)});
  }
  if (config.format == OutputFormat::Csv) {
    std::string s = "dt,steps,mean_error,se,max_error\n";
    for (const auto& l : levels) {
      s += num(l.dt) + ',' + std::to_string(l.steps) + ',' + num(mean_of(l.err)) + ',' + num(se_of(l.err)) + ',' +
           num(*std::max_element(l.err.begin(), l.err.end())) + '\n';
    }
    out.write(s);
    return;
  }
  json j = header_json(config, "convergence");
  j["horizon"] = horizon;
  j.erase("steps");
  j["connection"] = make_alpha(config).label();
  j["replicas"] = config.replicas;
  j["ladder"] = json::array();
  bool monotone = true;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    if (i > 0 && mean_of(l.err) >= mean_of(levels[i - 1].err)) monotone = false;
    j["ladder"].push_back({{"dt", l.dt},
                           {"steps", l.steps},
                           {"mean_error", mean_of(l.err)},
                           {"se", se_of(l.err)},
                           {"max_error", *std::max_element(l.err.begin(), l.err.end())}});
  }
  j["monotone"] = monotone;
  out.write(dump(j));
}

void run_campbell(const ExperimentConfig& config, int workers, Artifacts& out) {
  const ConnectionFunction alpha = make_alpha(config);
  if (!alpha.kills_diagonal()) {
    throw Error(ErrorKind::Precondition,
                "campbell: hypothesis alpha(A,A) = 0 fails for '" + alpha.label() + "' on " +
                    std::string(group_name(config.group)));
  }
  CHConfig ch;
  ch.group = config.group;
  ch.dts = config.dts;
  ch.horizon = config.horizon.value_or(1.0);
  ch.replicas = config.replicas;
  ch.base_seed = config.seed;
  ch.rule = config.rule;
  ch.workers = workers;
  const CHReport report = run_ch_ladder(ch);
  if (config.format == OutputFormat::Csv) {
    std::string s = "dt,steps,ch_mean,ch_se,ch_max,log_product_mean,log_product_se,log_product_max\n";
    for (const auto& p : report.ladder) {
      s += num(p.dt) + ',' + std::to_string(p.steps) + ',' + num(p.ch_mean) + ',' + num(p.ch_se) + ',' +
           num(p.ch_max) + ',' + num(p.log_product_mean) + ',' + num(p.log_product_se) + ',' +
           num(p.log_product_max) + '\n';
    }
    out.write(s);
    return;
  }
  json j{{"schema", 1},
         {"kind", "campbell-hausdorff"},
         {"group", group_name(report.group)},
         {"connection", report.connection},
         {"rule", to_string(report.rule)},
         {"horizon", report.horizon},
         {"replicas", report.replicas},
         {"seed", report.base_seed},
         {"ch_monotone", report.ch_monotone()},
         {"log_product_monotone", report.log_product_monotone()}};
  j["ladder"] = json::array();
  for (const auto& p : report.ladder) {
    j["ladder"].push_back({{"dt", p.dt},
                           {"steps", p.steps},
                           {"ch_mean", p.ch_mean},
                           {"ch_se", p.ch_se},
                           {"ch_max", p.ch_max},
                           {"log_product_mean", p.log_product_mean},
                           {"log_product_se", p.log_product_se},
                           {"log_product_max", p.log_product_max}});
  }
  out.write(dump(j));
}

void run_martingale(const ExperimentConfig& config, int workers, Artifacts& out, std::ostream& log) {
  const TimeGrid grid = config.grid();
  const ConnectionFunction alpha = make_alpha(config);
  const AlgMat cov = make_covariance(config);
  DriftOptions options;
  options.buckets = config.buckets;
  options.z_band = config.z_band;
  options.pass_fraction = config.significance;
  const DriftReport rep = martingale_verdict(
      static_cast<std::size_t>(config.replicas),
      [&](std::size_t r) { return exponentiate(config, make_driver(config, grid, cov, derive_seed(config.seed, r)), alpha); },
      alpha, options, workers);

  json j = header_json(config, "drift-report");
  j["connection"] = rep.connection;
  j["driver"] = to_string(config.driver);
  j["scheme"] = to_string(config.scheme);
  j["replicas"] = rep.replicas;
  j["buckets"] = rep.buckets;
  j["components"] = rep.components;
  j["z_band"] = rep.z_band;
  j["pass_fraction_required"] = rep.pass_fraction_required;
  j["pass_fraction"] = rep.pass_fraction;
  j["max_abs_z"] = rep.max_abs_z;
  j["pass"] = rep.pass;
  j["mean"] = rows_json(rep.mean);
  j["se"] = rows_json(rep.se);
  j["z"] = rows_json(rep.z);

  std::string z = algebra_header(rep.components, "bucket,t_end") + '\n';
  for (int b = 0; b < rep.buckets; ++b) {
    z += std::to_string(b) + ',' + num(grid.horizon * (b + 1) / rep.buckets);
    for (int c = 0; c < rep.components; ++c) z += ',' + num(rep.z(b, c));
    z += '\n';
  }
  if (config.format == OutputFormat::Json) {
    out.write(dump(j));
    out.write(z, ".z.csv");
  } else {
    out.write(z);
    out.write(dump(j), ".report.json");
  }
  char line[160];
  std::snprintf(line, sizeof line, "martingale verdict: %s (max |z| %.3f, pass fraction %.4f)\n",
                rep.pass ? "pass" : "fail", rep.max_abs_z, rep.pass_fraction);
  log << line;
}

void run_u_table(const ExperimentConfig& config, Artifacts& out) {
  const GroupSpec& g = group(config.group);
  const ConnectionFunction u = config.source == UTableSource::Oracle
                                   ? u_from_metric(standard_metric(g, config.lambda))
                                   : closed_form_u(config.group, config.lambda);
  const int n = g.algebra_dim();
  const auto& names = g.basis_names();
  if (config.format == OutputFormat::Csv) {
    std::string s = algebra_header(n, "i,j,basis_i,basis_j") + '\n';
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        s += std::to_string(i + 1) + ',' + std::to_string(j + 1) + ',' + names[i] + ',' + names[j];
        for (int k = 0; k < n; ++k) s += ',' + num(u.coeffs()(k, i, j));
        s += '\n';
      }
    }
    out.write(s);
    return;
  }
  json j{{"schema", 1},
         {"kind", "u-table"},
         {"group", g.name()},
         {"lambda", config.lambda},
         {"source", to_string(config.source)},
         {"basis", names}};
  j["entries"] = json::array();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      std::vector<double> v(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = u.coeffs()(k, a, b);
      j["entries"].push_back({{"i", a + 1}, {"j", b + 1}, {"value", v}});
    }
  }
  out.write(dump(j));
}

}  // namespace

void execute(const ExperimentConfig& config, int workers, std::ostream& stdout_sink) {
  config.validate();
  if (workers < 1) usage("workers must be at least 1");
  Artifacts out(config, stdout_sink);
  switch (config.command) {
    case Command::Exp: run_exp(config, workers, out); break;
    case Command::Log: run_log(config, workers, out); break;
    case Command::Roundtrip: run_roundtrip(config, workers, out); break;
    case Command::Convergence: run_convergence(config, workers, out); break;
    case Command::Campbell: run_campbell(config, workers, out); break;
    case Command::MartingaleTest: run_martingale(config, workers, out, std::cerr); break;
    case Command::UTable: run_u_table(config, out); break;
  }
}

int run(const ExperimentConfig& config, int workers, std::ostream& stdout_sink, std::ostream& err) {
  try {
    execute(config, workers, stdout_sink);
    return 0;
  } catch (const Error& e) {
    err << "stochlie: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "stochlie: numerical failure: " << e.what() << '\n';
    return 4;
  }
}

bool RegressionSummary::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

RegressionSummary regression_suite(const std::string& out_dir, const acceptance::Options& options) {
  if (out_dir.empty() || !fs::is_directory(out_dir)) usage("output directory '" + out_dir + "' does not exist");
  RegressionSummary summary;
  summary.results = acceptance::run_all(options);
  summary.results_file = (fs::path(out_dir) / "regression_results.json").string();

  json j{{"schema", 1}, {"kind", "regression"}, {"seed", options.seed}, {"all_passed", summary.all_passed()}};
  j["criteria"] = json::array();
  for (const auto& r : summary.results) {
    j["criteria"].push_back({{"id", r.id},
                             {"name", r.name},
                             {"passed", r.passed},
                             {"seconds", r.seconds},
                             {"time_limit", r.time_limit},
                             {"detail", r.detail}});
  }
  std::ofstream out(summary.results_file, std::ios::trunc);
  if (!out) usage("cannot write '" + summary.results_file + "'");
  out << j.dump(2) << '\n';
  return summary;
}

}  // namespace stochlie
