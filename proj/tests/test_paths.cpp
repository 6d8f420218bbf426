#include <atomic>
#include <cmath>
#include <numeric>

#include "test_util.hpp"

using namespace testing;

TEST_CASE("TimeGrid") {
  const TimeGrid grid(2.0, 8);
  CHECK(grid.dt() == 0.25);
  CHECK(grid.t(4) == 1.0);
  CHECK(kind_of([] { TimeGrid(0.0, 4); }) == ErrorKind::Usage);
  CHECK(kind_of([] { TimeGrid(1.0, 0); }) == ErrorKind::Usage);
  CHECK(kind_of([] { require_same_grid(TimeGrid(1.0, 4), TimeGrid(1.0, 5), "test"); }) == ErrorKind::GridMismatch);
}

TEST_CASE("counter RNG is a pure function of key and position") {
  const CounterRng rng(derive_seed(7, 3, 1));
  std::vector<double> a(6), b(2);
  rng.normals(0, a);
  rng.normals(4, b);
  CHECK(a[4] == b[0]);
  CHECK(a[5] == b[1]);
  CHECK(derive_seed(7, 3, 1) != derive_seed(7, 3, 0));
  CHECK(derive_seed(7, 3, 0) != derive_seed(7, 4, 0));
  CHECK(step_counter(3, 3) == 12);
  CHECK(step_counter(3, 6) == 18);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(static_cast<std::uint64_t>(i));
    CHECK((u > 0.0 && u < 1.0));
  }
}

TEST_CASE("standard normals pass a moment check") {
  constexpr int kSamples = 1000000;
  std::vector<double> z(kSamples);
  CounterRng(derive_seed(11, 0)).normals(0, z);
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (double x : z) m1 += x;
  m1 /= kSamples;
  for (double x : z) {
    const double d = x - m1;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= kSamples;
  m3 /= kSamples;
  m4 /= kSamples;
  CHECK(std::abs(m1) < 0.005);
  CHECK(std::abs(m2 - 1.0) < 0.005);
  CHECK(std::abs(m3 / std::pow(m2, 1.5)) < 0.05);
  CHECK(std::abs(m4 / (m2 * m2) - 3.0) < 0.1);
}

TEST_CASE("brownian_driver increments have variance dt") {
  const GroupSpec& so3 = group(GroupId::SO3);
  const TimeGrid grid(1.0, 40000);
  const AlgebraPath m = brownian_driver(so3, grid, 99, unit_cov(so3));
  CHECK(m.values.row(0).isZero(0.0));
  const PathMatrix inc = m.increments();
  const double n = inc.rows();
  for (int c = 0; c < 3; ++c) {
    const double var = inc.col(c).squaredNorm() / n;
    CHECK(std::abs(var - grid.dt()) < 3.0 * grid.dt() * std::sqrt(2.0 / n));
  }
}

TEST_CASE("brownian_driver is deterministic in its seed") {
  const GroupSpec& se3 = group(GroupId::SE3);
  const TimeGrid grid(1.0, 100);
  const AlgebraPath a = brownian_driver(se3, grid, 5, unit_cov(se3));
  const AlgebraPath b = brownian_driver(se3, grid, 5, unit_cov(se3));
  const AlgebraPath c = brownian_driver(se3, grid, 6, unit_cov(se3));
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  AlgMat bad = unit_cov(se3);
  bad(0, 0) = -1.0;
  CHECK(kind_of([&] { brownian_driver(se3, grid, 5, bad); }) == ErrorKind::Metric);
  CHECK(kind_of([&] { cholesky_factor(bad); }) == ErrorKind::Metric);
}

TEST_CASE("drift_diffusion_driver") {
  const GroupSpec& so3 = group(GroupId::SO3);
  const TimeGrid grid(2.0, 200);
  const AlgVec e3 = AlgVec::Unit(3, 2);
  const AlgebraPath line = drift_diffusion_driver(so3, grid, 1, e3, AlgMat::Zero(3, 3));
  for (int k = 0; k <= grid.steps; ++k) {
    CHECK(std::abs(line.values(k, 2) - grid.t(k)) < 1e-12);
    CHECK(line.values(k, 0) == 0.0);
  }
  const AlgebraPath zero = drift_diffusion_driver(so3, grid, 1, AlgVec::Zero(3), AlgMat::Zero(3, 3));
  CHECK(zero.values.isZero(0.0));

  // b = 0 with the Cholesky factor matches brownian_driver in distribution
  AlgMat cov(3, 3);
  cov << 2.0, 0.5, 0.0, 0.5, 1.0, -0.3, 0.0, -0.3, 0.5;
  const TimeGrid long_grid(1.0, 100000);
  const AlgebraPath dd = drift_diffusion_driver(so3, long_grid, 2, AlgVec::Zero(3), cholesky_factor(cov));
  const Eigen::MatrixXd realized = terminal_covariation(dd.values, dd.values);
  CHECK((realized - Eigen::MatrixXd(cov)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("quadratic covariation of Brownian motion") {
  const GroupSpec& se3 = group(GroupId::SE3);
  const TimeGrid grid(1.0, 10000);
  const AlgebraPath p = brownian_driver(se3, grid, 3, unit_cov(se3));
  const auto qv = quadratic_covariation(p, p);
  REQUIRE(qv.size() == static_cast<std::size_t>(grid.steps + 1));
  CHECK(qv.front().isZero(0.0));
  for (int i = 0; i < 6; ++i) CHECK(std::abs(qv.back()(i, i) - 1.0) < 0.05);

  const AlgebraPath q = brownian_driver(se3, grid, 4, unit_cov(se3));
  const Eigen::MatrixXd cross = terminal_covariation(p.values, q.values);
  CHECK(cross.cwiseAbs().maxCoeff() < 4.0 * std::sqrt(2.0 * grid.dt()));

  const AlgebraPath other_grid = brownian_driver(se3, TimeGrid(1.0, 100), 4, unit_cov(se3));
  CHECK(kind_of([&] { quadratic_covariation(p, other_grid); }) == ErrorKind::GridMismatch);
}

TEST_CASE("covariation of a smooth path vanishes like dt") {
  const GroupSpec& so3 = group(GroupId::SO3);
  double previous = 1.0;
  for (int steps : {100, 1000, 10000}) {
    const TimeGrid grid(1.0, steps);
    const AlgebraPath smooth = line_path(so3, grid, AlgVec::Constant(3, 1.0));
    const AlgebraPath bm = brownian_driver(so3, grid, 8, unit_cov(so3));
    const double sup = terminal_covariation(smooth.values, smooth.values).cwiseAbs().maxCoeff();
    CHECK(sup == doctest::Approx(grid.dt()));
    CHECK(sup < previous);
    previous = sup;
    CHECK(terminal_covariation(smooth.values, bm.values).cwiseAbs().maxCoeff() < 10 * std::sqrt(grid.dt()) * grid.dt() * steps);
  }
}

TEST_CASE("realized covariance error halves when steps quadruple") {
  const GroupSpec& so3 = group(GroupId::SO3);
  AlgMat cov(3, 3);
  cov << 1.0, 0.3, 0.0, 0.3, 2.0, 0.4, 0.0, 0.4, 1.0;
  auto mean_error = [&](int steps) {
    double total = 0.0;
    for (int r = 0; r < 64; ++r) {
      const AlgebraPath p = brownian_driver(so3, TimeGrid(1.0, steps), derive_seed(17, r, steps), cov);
      total += (terminal_covariation(p.values, p.values) - Eigen::MatrixXd(cov)).norm();
    }
    return total / 64;
  };
  const double ratio = mean_error(1000) / mean_error(4000);
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.5);
}

TEST_CASE("null_qv_check") {
  const GroupSpec& se3 = group(GroupId::SE3);
  const TimeGrid grid(1.0, 1000);
  const AlgebraPath p = brownian_driver(se3, grid, 21, unit_cov(se3));
  CHECK_FALSE(null_qv_check(p, p, 0.99).null_qv);
  const AlgebraPath smooth = line_path(se3, grid, AlgVec::Constant(6, 0.7));
  CHECK(null_qv_check(p, smooth, 0.99).null_qv);
  int passes = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const AlgebraPath a = brownian_driver(se3, grid, derive_seed(22, trial, 0), unit_cov(se3));
    const AlgebraPath b = brownian_driver(se3, grid, derive_seed(22, trial, 1), unit_cov(se3));
    const NullQvResult r = null_qv_check(a, b, 0.99);
    CHECK(r.tested_entries == 36);
    passes += r.null_qv;
  }
  CHECK(passes >= 95);
}

TEST_CASE("normal_quantile") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
  CHECK(normal_quantile(0.995) == doctest::Approx(2.575829304).epsilon(1e-8));
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
  CHECK(*std::min_element(hits.begin(), hits.end()) == 1);
  try {
    parallel_for(100, 3, [](std::size_t i) {
      if (i == 40 || i == 70) throw Error(ErrorKind::Range, "index " + std::to_string(i));
    });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("index 40") != std::string::npos);
  }
}

TEST_CASE("ensembles are identical for any worker count") {
  const GroupSpec& se2 = group(GroupId::SE2);
  const TimeGrid grid(1.0, 50);
  auto build = [&](int workers) {
    std::vector<AlgebraPath> paths(17);
    parallel_for(paths.size(), workers,
                 [&](std::size_t r) { paths[r] = brownian_driver(se2, grid, derive_seed(3, r), unit_cov(se2)); });
    return paths;
  };
  const auto one = build(1), many = build(5);
  for (std::size_t r = 0; r < one.size(); ++r) CHECK(one[r].values == many[r].values);
}

TEST_CASE("path arithmetic and checks") {
  const GroupSpec& so3 = group(GroupId::SO3);
  const TimeGrid grid(1.0, 10);
  const AlgebraPath a = brownian_driver(so3, grid, 1, unit_cov(so3));
  const AlgebraPath b = brownian_driver(so3, grid, 2, unit_cov(so3));
  CHECK(((a + b) - b).values.isApprox(a.values));
  CHECK(AlgebraPath::from_increments(so3, grid, a.increments()).values.isApprox(a.values, 1e-14));
  const AlgebraPath c = brownian_driver(group(GroupId::SE2), grid, 1, unit_cov(group(GroupId::SE2)));
  CHECK(kind_of([&] { a + c; }) == ErrorKind::GroupMismatch);
  PathMatrix bad = a.values;
  bad(3, 1) = std::nan("");
  CHECK(kind_of([&] { AlgebraPath(so3, grid, bad); }) == ErrorKind::Range);
  CHECK(kind_of([&] { AlgebraPath(so3, grid, PathMatrix::Zero(5, 3)); }) == ErrorKind::Dimension);
}
