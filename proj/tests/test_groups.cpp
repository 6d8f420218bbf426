#include <cmath>

#include "test_util.hpp"

using namespace testing;

namespace {

AlgebraVector e(GroupId id, int i) { return AlgebraVector::basis(group(id), i); }

void check_coords(const AlgebraVector& v, std::initializer_list<double> expected, double tol = 1e-14) {
  REQUIRE(v.coords.size() == static_cast<int>(expected.size()));
  int i = 0;
  for (double x : expected) CHECK(std::abs(v.coords[i++] - x) <= tol);
}

}  // namespace

TEST_CASE("group names parse case-insensitively") {
  CHECK(parse_group("SE3") == GroupId::SE3);
  CHECK(parse_group("sl2r") == GroupId::SL2R);
  CHECK(parse_group("E11") == GroupId::E11);
  CHECK(kind_of([] { parse_group("so4"); }) == ErrorKind::Usage);
  for (GroupId id : kAllGroups) CHECK(parse_group(group_name(id)) == id);
}

TEST_CASE("catalog dimensions and independent bases") {
  const std::pair<GroupId, std::pair<int, int>> dims[] = {
      {GroupId::SO3, {3, 3}}, {GroupId::SE2, {3, 3}}, {GroupId::SE3, {4, 6}},
      {GroupId::E11, {3, 3}}, {GroupId::N3, {3, 3}},  {GroupId::SL2R, {2, 3}}};
  for (const auto& [id, md] : dims) {
    const GroupSpec& g = group(id);
    CHECK(g.matrix_dim() == md.first);
    CHECK(g.algebra_dim() == md.second);
    Eigen::MatrixXd vec(g.matrix_dim() * g.matrix_dim(), g.algebra_dim());
    for (int i = 0; i < g.algebra_dim(); ++i) vec.col(i) = g.basis()[i].reshaped();
    CHECK(std::abs((vec.transpose() * vec).determinant()) > 1e-6);
  }
}

TEST_CASE("bracket examples") {
  const GroupSpec& so3 = group(GroupId::SO3);
  const AlgebraVector a = random_element(so3);
  check_coords(bracket(a, a), {0, 0, 0});
  check_coords(bracket(e(GroupId::SO3, 0), e(GroupId::SO3, 1)), {0, 0, 1});
  check_coords(bracket(e(GroupId::SO3, 1), e(GroupId::SO3, 2)), {1, 0, 0});
  check_coords(bracket(e(GroupId::SO3, 2), e(GroupId::SO3, 0)), {0, 1, 0});
  // sl(2): H, E+, E-
  check_coords(bracket(e(GroupId::SL2R, 0), e(GroupId::SL2R, 1)), {0, 2, 0});
  check_coords(bracket(e(GroupId::SL2R, 1), e(GroupId::SL2R, 2)), {1, 0, 0});
  check_coords(bracket(e(GroupId::SL2R, 0), e(GroupId::SL2R, 2)), {0, 0, -2});
  CHECK(kind_of([&] { bracket(a, e(GroupId::SE2, 0)); }) == ErrorKind::GroupMismatch);
}

TEST_CASE("structure constants of n3, se2 and e11") {
  const BilinearTable& n3 = structure_constants(group(GroupId::N3));
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double expected = 0.0;
        if (k == 2 && i == 0 && j == 1) expected = 1.0;
        if (k == 2 && i == 1 && j == 0) expected = -1.0;
        CHECK(n3(k, i, j) == expected);
      }
    }
  }
  check_coords(bracket(e(GroupId::SE2, 0), e(GroupId::SE2, 1)), {0, 0, 1});
  check_coords(bracket(e(GroupId::SE2, 0), e(GroupId::SE2, 2)), {0, -1, 0});
  check_coords(bracket(e(GroupId::SE2, 1), e(GroupId::SE2, 2)), {0, 0, 0});
  check_coords(bracket(e(GroupId::E11, 0), e(GroupId::E11, 1)), {0, 1, 0});
  check_coords(bracket(e(GroupId::E11, 0), e(GroupId::E11, 2)), {0, 0, -1});
}

TEST_CASE("structure constants agree with bracket and are antisymmetric") {
  for (GroupId id : kAllGroups) {
    const GroupSpec& g = group(id);
    const BilinearTable& c = g.structure_constants();
    const int n = g.algebra_dim();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const AlgebraVector b = bracket(e(id, i), e(id, j));
        for (int k = 0; k < n; ++k) {
          CHECK(std::abs(c(k, i, j) - b.coords[k]) <= 1e-12);
          CHECK(c(k, i, j) == -c(k, j, i));
        }
      }
    }
  }
}

TEST_CASE("Jacobi identity on random triples") {
  for (GroupId id : kAllGroups) {
    const GroupSpec& g = group(id);
    for (int trial = 0; trial < 50; ++trial) {
      const AlgebraVector a = random_element(g), b = random_element(g), c = random_element(g);
      const AlgebraVector j = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b));
      CHECK(j.coords.cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("Ad examples and homomorphism") {
  for (GroupId id : kAllGroups) {
    const GroupSpec& g = group(id);
    const AlgebraVector a = random_element(g);
    const GroupMat id_mat = GroupMat::Identity(g.matrix_dim(), g.matrix_dim());
    CHECK((Ad(id_mat, a).coords - a.coords).cwiseAbs().maxCoeff() < 1e-15);
    for (int trial = 0; trial < 10; ++trial) {
      const GroupMat g1 = random_member(g), g2 = random_member(g);
      const AlgMat ad1 = adjoint_matrix(g, g1);
      const AlgMat ad1_inv = adjoint_matrix(g, g1.inverse());
      CHECK((ad1 * ad1_inv - AlgMat::Identity(g.algebra_dim(), g.algebra_dim())).cwiseAbs().maxCoeff() < 1e-10);
      const AlgVec lhs = Ad(g1 * g2, a).coords;
      const AlgVec rhs = Ad(g1, Ad(g2, a)).coords;
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
      const AlgebraVector b = random_element(g);
      CHECK((Ad(g1, 2.0 * a + b).coords - (2.0 * Ad(g1, a).coords + Ad(g1, b).coords)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("Ad of a z-rotation rotates E1 and E2") {
  const GroupSpec& so3 = group(GroupId::SO3);
  const double theta = 0.9;
  const GroupMat r = mat_exp(theta * so3.basis()[2]);
  check_coords(Ad(r, e(GroupId::SO3, 0)), {std::cos(theta), std::sin(theta), 0}, 1e-14);
  check_coords(Ad(r, e(GroupId::SO3, 1)), {-std::sin(theta), std::cos(theta), 0}, 1e-14);
  check_coords(Ad(r, e(GroupId::SO3, 2)), {0, 0, 1}, 1e-14);
}

TEST_CASE("derivative of Ad(exp(tA)) at zero is ad(A)") {
  const double h = 1e-5;
  for (GroupId id : kAllGroups) {
    const GroupSpec& g = group(id);
    for (int trial = 0; trial < 10; ++trial) {
      const AlgebraVector a = random_element(g), b = random_element(g);
      const GroupMat ma = to_matrix(a);
      const AlgVec fd = (Ad(mat_exp(h * ma), b).coords - Ad(mat_exp(-h * ma), b).coords) / (2 * h);
      CHECK((fd - bracket(a, b).coords).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("Ad rejects non-members") {
  const GroupSpec& so3 = group(GroupId::SO3);
  const GroupMat scaled = 2.0 * GroupMat::Identity(3, 3);
  CHECK(kind_of([&] { Ad(scaled, e(GroupId::SO3, 0)); }) == ErrorKind::Membership);
  (void)so3;
}

TEST_CASE("to_matrix and from_matrix") {
  for (GroupId id : kAllGroups) {
    const GroupSpec& g = group(id);
    CHECK(to_matrix(AlgebraVector::zero(g)).isZero(0.0));
    for (int trial = 0; trial < 20; ++trial) {
      const AlgebraVector a = random_element(g, 3.0);
      CHECK((from_matrix(g, to_matrix(a)).coords - a.coords).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  const GroupSpec& so3 = group(GroupId::SO3);
  const GroupMat off = to_matrix(e(GroupId::SO3, 0)) + GroupMat::Identity(3, 3);
  CHECK(kind_of([&] { from_matrix(so3, off); }) == ErrorKind::NotInAlgebra);
  GroupMat lower = GroupMat::Zero(3, 3);
  lower(2, 0) = 1.0;
  CHECK(kind_of([&] { from_matrix(group(GroupId::N3), lower); }) == ErrorKind::NotInAlgebra);
  CHECK(kind_of([&] { from_matrix(so3, GroupMat::Zero(2, 2)); }) == ErrorKind::Dimension);
}

TEST_CASE("membership defects") {
  for (GroupId id : kAllGroups) {
    const GroupSpec& g = group(id);
    CHECK(membership_defect(g, GroupMat::Identity(g.matrix_dim(), g.matrix_dim())) == 0.0);
    for (int trial = 0; trial < 20; ++trial) {
      CHECK(membership_defect(g, random_member(g, 1.0 / std::sqrt(g.algebra_dim()))) < 1e-10);
    }
    CHECK(kind_of([&] { membership_defect(g, GroupMat::Identity(1, 1)); }) == ErrorKind::Dimension);
  }
  CHECK(membership_defect(group(GroupId::SL2R), 2.0 * GroupMat::Identity(2, 2)) == doctest::Approx(3.0));
  GroupMat sheared = GroupMat::Identity(3, 3);
  sheared(1, 0) = 0.1;
  CHECK(membership_defect(group(GroupId::N3), sheared) > 0.05);
  CHECK(membership_defect(group(GroupId::SE2), sheared) > 0.05);
  GroupMat not_affine = GroupMat::Identity(4, 4);
  not_affine(3, 0) = 0.5;
  CHECK(membership_defect(group(GroupId::SE3), not_affine) > 0.4);
}
