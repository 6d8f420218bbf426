#include <cmath>

#include "test_util.hpp"

using namespace testing;

TEST_CASE("mat_exp of zero is the identity") {
  const Eigen::Matrix3d z = Eigen::Matrix3d::Zero();
  CHECK(mat_exp(z) == Eigen::Matrix3d::Identity());
}

TEST_CASE("mat_exp of a Heisenberg element terminates the series") {
  Eigen::Matrix3d a;
  a << 0, 0.25, 0.125, 0, 0, 0.5, 0, 0, 0;
  const Eigen::Matrix3d expected = Eigen::Matrix3d::Identity() + a + a * a / 2.0;
  CHECK(mat_exp(a) == expected);
}

TEST_CASE("mat_exp of a rotation generator matches Rodrigues") {
  const GroupSpec& so3 = group(GroupId::SO3);
  for (double theta : {0.3, 1.7, 3.0, 6.0}) {
    const GroupMat r = mat_exp(theta * so3.basis()[2]);
    Eigen::Matrix3d expected;
    expected << std::cos(theta), -std::sin(theta), 0, std::sin(theta), std::cos(theta), 0, 0, 0, 1;
    CHECK((r - expected).cwiseAbs().maxCoeff() < 1e-14);
  }
  // general axis: I + sin(t) K + (1 - cos(t)) K^2 for unit-axis K
  Eigen::Vector3d axis(0.3, -0.5, 0.8);
  axis.normalize();
  const double theta = 2.2;
  const GroupMat k = so3.matrix_of(axis);
  const Eigen::Matrix3d rodrigues =
      Eigen::Matrix3d::Identity() + std::sin(theta) * k + (1 - std::cos(theta)) * k * k;
  CHECK((mat_exp(theta * k) - rodrigues).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("mat_exp(A) mat_exp(-A) is the identity") {
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Matrix4d a = Eigen::Matrix4d::Random();
    a *= uniform(0.0, 1.0) / a.norm();
    CHECK((mat_exp(a) * mat_exp(-a) - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("mat_log inverts mat_exp on the half ball") {
  CHECK(mat_log(Eigen::Matrix3d::Identity()) == Eigen::Matrix3d::Zero());
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Matrix4d a = Eigen::Matrix4d::Random();
    a *= uniform(0.0, 0.5) / a.norm();
    CHECK((mat_log(mat_exp(a)) - a).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("mat_log of a unipotent matrix terminates the series") {
  Eigen::Matrix3d n;
  n << 0, 0.5, 0.25, 0, 0, -0.75, 0, 0, 0;
  const Eigen::Matrix3d m = Eigen::Matrix3d::Identity() + n;
  CHECK((mat_log(m) - (n - n * n / 2.0)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("mat_log handles large rotations through square roots") {
  const GroupSpec& so3 = group(GroupId::SO3);
  const GroupMat a = 2.5 * so3.basis()[0] + 0.7 * so3.basis()[2];
  CHECK((mat_log(mat_exp(a)) - a).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mat_log errors") {
  Eigen::Matrix2d singular;
  singular << 1, 2, 2, 4;
  CHECK(kind_of([&] { mat_log(singular); }) == ErrorKind::Singularity);
  const Eigen::Matrix2d half_turn = -Eigen::Matrix2d::Identity();
  try {
    mat_log(half_turn);
    FAIL("expected a range error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Range);
    CHECK(std::string(e.what()).find("reduce the time step") != std::string::npos);
  }
  const Eigen::MatrixXd rect = Eigen::MatrixXd::Ones(2, 3);
  CHECK(kind_of([&] { mat_exp(rect); }) == ErrorKind::Dimension);
  CHECK(kind_of([&] { mat_log(rect); }) == ErrorKind::Dimension);
  Eigen::Matrix2d nan = Eigen::Matrix2d::Identity();
  nan(0, 1) = std::nan("");
  CHECK(kind_of([&] { mat_exp(nan); }) == ErrorKind::Range);
}

TEST_CASE("solve_linear") {
  const Eigen::Vector3d b(1, -2, 3);
  CHECK(solve_linear(Eigen::Matrix3d::Identity(), b) == b);
  const Eigen::Matrix2d d = Eigen::Vector2d(2, 4).asDiagonal();
  const Eigen::VectorXd x = solve_linear(d, Eigen::Vector2d(2, 8));
  CHECK(x[0] == 1.0);
  CHECK(x[1] == 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Random() + 6.0 * Eigen::Matrix<double, 6, 6>::Identity();
    const Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Random();
    CHECK((a * solve_linear(a, rhs) - rhs).norm() < 1e-10);
  }
  Eigen::Matrix2d singular;
  singular << 1, 1, 1, 1;
  CHECK(kind_of([&] { solve_linear(singular, Eigen::Vector2d(1, 1)); }) == ErrorKind::Singularity);
  CHECK(kind_of([&] { solve_linear(singular, Eigen::Vector3d(1, 1, 1)); }) == ErrorKind::Dimension);
}

TEST_CASE("frobenius_dist") {
  const Eigen::Matrix3d a = Eigen::Matrix3d::Random();
  const Eigen::Matrix3d b = Eigen::Matrix3d::Random();
  CHECK(frobenius_dist(a, a) == 0.0);
  CHECK(frobenius_dist(Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero()) == doctest::Approx(std::sqrt(2.0)));
  CHECK(frobenius_dist(a, b) == frobenius_dist(b, a));
  const Eigen::MatrixXd da = a, dz = Eigen::MatrixXd::Zero(2, 2);
  CHECK(kind_of([&] { frobenius_dist(da, dz); }) == ErrorKind::Dimension);
}

TEST_CASE("det(exp A) = exp(tr A) on every catalog algebra") {
  for (GroupId id : kAllGroups) {
    const GroupSpec& g = group(id);
    for (int trial = 0; trial < 20; ++trial) {
      const GroupMat a = g.matrix_of(random_coords(g.algebra_dim(), 1.5));
      CHECK(mat_exp(a).determinant() == doctest::Approx(std::exp(a.trace())).epsilon(1e-8));
    }
  }
}

TEST_CASE("Tolerance") {
  const Tolerance tol;
  CHECK(tol.abs_tol == 1e-12);
  CHECK(tol.rel_tol == 1e-9);
  CHECK(tol.close(1.0, 1.0 + 1e-10));
  CHECK_FALSE(tol.close(1.0, 1.0 + 1e-8));
  CHECK(kind_of([] { Tolerance(-1.0, 0.0); }) == ErrorKind::Range);
  CHECK(kind_of([] { Tolerance(0.0, 0.0); }) == ErrorKind::Range);
}
