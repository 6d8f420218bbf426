#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "stochlie/experiment.hpp"
#include "test_util.hpp"

using namespace testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("stochlie_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_quiet(const ExperimentConfig& c, int workers = 1, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = run(c, workers, o, e);
  if (out) *out = o.str();
  return code;
}

}  // namespace

TEST_CASE("configuration round-trips through its text form") {
  ExperimentConfig c;
  c.command = Command::MartingaleTest;
  c.group = GroupId::SL2R;
  c.connection = ConnectionKind::BiInvariant;
  c.lambda = 1.0 / 3.0;
  c.dt = 0.1;
  c.steps = 7;
  c.seed = std::numeric_limits<std::uint64_t>::max();
  c.dts = {0.1, 1e-3 / 3, 2.5e-7};
  c.drift = {0.3, -0.2, 1.0 / 7.0};
  c.covariance = "cov.csv";
  c.out = "out/file.csv";
  c.format = OutputFormat::Json;
  c.driver = DriverKind::Drift;
  c.scheme = Scheme::Strat;
  c.significance = 0.9;
  c.z_band = 3.5;
  c.rule = AdRule::LeftPoint;
  c.source = UTableSource::ClosedForm;
  c.input = "in.csv";
  const ExperimentConfig back = ExperimentConfig::parse(c.serialize());
  CHECK(back == c);
  CHECK(ExperimentConfig::parse(ExperimentConfig{}.serialize()) == ExperimentConfig{});
  CHECK(ExperimentConfig::parse("# comment\n\n  group = so3 \nreplicas=5\n").group == GroupId::SO3);
}

TEST_CASE("configuration errors are usage errors") {
  CHECK(kind_of([] { ExperimentConfig::parse("colour=blue\n"); }) == ErrorKind::Usage);
  CHECK(kind_of([] { ExperimentConfig::parse("lambda=one\n"); }) == ErrorKind::Usage);
  CHECK(kind_of([] { ExperimentConfig::parse("steps=1.5\n"); }) == ErrorKind::Usage);
  CHECK(kind_of([] { ExperimentConfig::parse("seed=-1\n"); }) == ErrorKind::Usage);
  CHECK(kind_of([] { ExperimentConfig::parse("no equals sign\n"); }) == ErrorKind::Usage);
  CHECK(kind_of([] { ExperimentConfig::parse("connection=flat\n"); }) == ErrorKind::Usage);
  CHECK(kind_of([] { ExperimentConfig::parse("group=so4\n"); }) == ErrorKind::Usage);
  ExperimentConfig c;
  c.lambda = 0.0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Usage);
  c = {};
  c.replicas = 0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Usage);
  c = {};
  c.drift = {1.0};
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Usage);
  c = {};
  c.dts = {};
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Usage);
}

TEST_CASE("grid resolution") {
  ExperimentConfig c;
  CHECK(c.grid() == TimeGrid(1.0, 1000));
  c.dt = 1e-3;
  c.steps = 1000;
  CHECK(c.grid() == TimeGrid(1.0, 1000));
  c.steps.reset();
  c.horizon = 2.0;
  CHECK(c.grid().steps == 2000);
  c.dt = 0.3;
  CHECK(kind_of([&] { c.grid(); }) == ErrorKind::Usage);
  c.dt.reset();
  c.steps = 10;
  CHECK(c.grid() == TimeGrid(2.0, 10));
  c.dt = 0.1;
  CHECK(kind_of([&] { c.grid(); }) == ErrorKind::Usage);
}

TEST_CASE("exit codes") {
  CHECK(exit_code(ErrorKind::Usage) == 2);
  CHECK(exit_code(ErrorKind::Dimension) == 2);
  CHECK(exit_code(ErrorKind::Precondition) == 3);
  CHECK(exit_code(ErrorKind::Power) == 3);
  CHECK(exit_code(ErrorKind::Metric) == 3);
  CHECK(exit_code(ErrorKind::Range) == 4);
  CHECK(exit_code(ErrorKind::Singularity) == 4);
  CHECK(exit_code(ErrorKind::IntegratorDrift) == 4);
}

TEST_CASE("roundtrip writes errors, a summary and a manifest") {
  TempDir dir;
  ExperimentConfig c;
  c.command = Command::Roundtrip;
  c.dt = 1e-3;
  c.steps = 1000;
  c.replicas = 8;
  c.out = dir.file("rt.csv");
  REQUIRE(run_quiet(c) == 0);
  const std::string csv = slurp(c.out);
  CHECK(csv.rfind("replica,terminal_error\n0,", 0) == 0);
  CHECK(csv.find("\nmean,") != std::string::npos);
  CHECK(csv.find("\nse,") != std::string::npos);
  const ExperimentConfig manifest = ExperimentConfig::parse(slurp(c.out + ".manifest"));
  CHECK(manifest.grid() == c.grid());
  CHECK(manifest.seed == c.seed);
  CHECK(manifest.command == Command::Roundtrip);
  // rerunning from the manifest reproduces the artifact
  const std::string first = csv;
  REQUIRE(run_quiet(manifest) == 0);
  CHECK(slurp(c.out) == first);
}

TEST_CASE("outputs are byte-identical across worker counts") {
  TempDir dir;
  const std::pair<Command, std::string> commands[] = {{Command::Exp, "exp"},
                                                      {Command::Log, "log"},
                                                      {Command::Roundtrip, "rt"},
                                                      {Command::Convergence, "conv"},
                                                      {Command::MartingaleTest, "mart"},
                                                      {Command::Campbell, "ch"}};
  for (const auto& [command, name] : commands) {
    for (OutputFormat format : {OutputFormat::Csv, OutputFormat::Json}) {
      ExperimentConfig c;
      c.command = command;
      c.group = GroupId::SO3;
      c.connection = ConnectionKind::BiInvariant;
      c.steps = 40;
      c.replicas = command == Command::MartingaleTest ? 100 : 6;
      c.dts = {0.05, 0.025};
      c.format = format;
      c.out = dir.file(name + "_1");
      REQUIRE(run_quiet(c, 1) == 0);
      c.out = dir.file(name + "_4");
      REQUIRE(run_quiet(c, 4) == 0);
      CHECK(slurp(dir.file(name + "_1")) == slurp(dir.file(name + "_4")));
      CHECK(fs::exists(dir.file(name + "_1.manifest")));
    }
  }
}

TEST_CASE("exp output feeds log") {
  TempDir dir;
  ExperimentConfig c;
  c.command = Command::Exp;
  c.group = GroupId::SE2;
  c.steps = 20;
  c.replicas = 3;
  c.scheme = Scheme::Strat;
  c.out = dir.file("x.csv");
  REQUIRE(run_quiet(c) == 0);
  CHECK(slurp(c.out).rfind("replica,k,t,m11,m12,m13,m21,m22,m23,m31,m32,m33\n", 0) == 0);

  ExperimentConfig from_file = c;
  from_file.command = Command::Log;
  from_file.input = c.out;
  from_file.out = dir.file("l1.csv");
  ExperimentConfig generated = c;
  generated.command = Command::Log;
  generated.out = dir.file("l2.csv");
  REQUIRE(run_quiet(from_file) == 0);
  REQUIRE(run_quiet(generated) == 0);
  const std::string a = slurp(from_file.out);
  CHECK(a.rfind("replica,k,t,c1,c2,c3\n", 0) == 0);
  CHECK(a == slurp(generated.out));

  std::ofstream(dir.file("bad.csv")) << "replica,k,t,c1\n0,0,0,0\n";
  from_file.input = dir.file("bad.csv");
  CHECK(run_quiet(from_file) == 2);
}

TEST_CASE("u-table lists the SE(3) cross-product table") {
  ExperimentConfig c;
  c.command = Command::UTable;
  std::string csv;
  REQUIRE(run_quiet(c, 1, &csv) == 0);
  CHECK(csv.rfind("i,j,basis_i,basis_j,c1,c2,c3,c4,c5,c6\n", 0) == 0);
  CHECK(csv.find("\n1,5,E1,e2,0,0,0,0,0,0.5\n") != std::string::npos);
  CHECK(csv.find("\n1,6,E1,e3,0,0,0,0,-0.5,0\n") != std::string::npos);
  CHECK(csv.find("\n2,4,E2,e1,0,0,0,0,0,-0.5\n") != std::string::npos);
  c.source = UTableSource::ClosedForm;
  std::string closed;
  REQUIRE(run_quiet(c, 1, &closed) == 0);
  CHECK(closed == csv);
  c.group = GroupId::SO3;
  CHECK(run_quiet(c) == 2);
}

TEST_CASE("errors map to exit codes") {
  TempDir dir;
  ExperimentConfig c;
  c.steps = 10;
  c.replicas = 2;
  c.out = dir.file("missing/out.csv");
  CHECK(run_quiet(c) == 2);

  c.out.clear();
  c.covariance = dir.file("nope.csv");
  CHECK(run_quiet(c) == 2);
  std::ofstream(dir.file("small.csv")) << "1,0\n0,1\n";
  c.covariance = dir.file("small.csv");
  CHECK(run_quiet(c) == 2);
  std::ofstream(dir.file("indef.csv")) << "1,0,0,0,0,0\n0,1,0,0,0,0\n0,0,1,0,0,0\n0,0,0,1,0,0\n0,0,0,0,-1,0\n0,0,0,0,0,1\n";
  c.covariance = dir.file("indef.csv");
  CHECK(run_quiet(c) == 3);

  ExperimentConfig ch;
  ch.command = Command::Campbell;
  ch.replicas = 2;
  CHECK(run_quiet(ch) == 3);

  ExperimentConfig mt;
  mt.command = Command::MartingaleTest;
  mt.replicas = 10;
  mt.steps = 20;
  CHECK(run_quiet(mt) == 3);
}

TEST_CASE("covariance files load and drive the martingale test") {
  TempDir dir;
  std::ofstream(dir.file("cov.csv")) << "1,0,0,0,0.8,0\n0,1,0,-0.8,0,0\n0,0,1,0,0,0\n"
                                        "0,-0.8,0,1,0,0\n0.8,0,0,0,1,0\n0,0,0,0,0,1\n";
  const AlgMat cov = load_covariance(dir.file("cov.csv"), 6);
  CHECK(cov(0, 4) == 0.8);
  CHECK(cov(1, 3) == -0.8);
  ExperimentConfig c;
  c.command = Command::MartingaleTest;
  c.scheme = Scheme::Strat;
  c.covariance = dir.file("cov.csv");
  c.replicas = 2000;
  c.steps = 100;
  c.format = OutputFormat::Json;
  c.out = dir.file("report.json");
  REQUIRE(run_quiet(c) == 0);
  const std::string report = slurp(c.out);
  CHECK(report.find("\"schema\": 1") != std::string::npos);
  CHECK(report.find("\"pass\": false") != std::string::npos);
  CHECK(slurp(c.out + ".z.csv").rfind("bucket,t_end,c1,c2,c3,c4,c5,c6\n", 0) == 0);
  CHECK(fs::exists(c.out + ".z.csv.manifest"));
}

TEST_CASE("regression suite") {
  CHECK(kind_of([] { regression_suite("/nonexistent/dir"); }) == ErrorKind::Usage);
  TempDir dir;
  acceptance::Options options;
  options.only = {1, 3};
  const RegressionSummary ok = regression_suite(dir.path.string(), options);
  CHECK(ok.all_passed());
  CHECK(ok.results.size() == 2);
  const std::string json = slurp(ok.results_file);
  CHECK(json.find("\"schema\": 1") != std::string::npos);
  CHECK(json.find("\"all_passed\": true") != std::string::npos);

  BilinearTable tampered = closed_form_u(GroupId::SE3, 1.0).coeffs();
  tampered(3, 1, 5) = tampered(3, 5, 1) = 0.25;
  options.only = {1};
  options.tampered_se3 = tampered;
  const RegressionSummary bad = regression_suite(dir.path.string(), options);
  CHECK_FALSE(bad.all_passed());
  CHECK(bad.results[0].id == 1);
  CHECK(slurp(bad.results_file).find("\"all_passed\": false") != std::string::npos);
}
