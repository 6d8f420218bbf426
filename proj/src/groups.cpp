#include "stochlie/groups.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace stochlie {

std::string_view group_name(GroupId id) {
  switch (id) {
    case GroupId::SO3: return "so3";
    case GroupId::SE2: return "se2";
    case GroupId::SE3: return "se3";
    case GroupId::E11: return "e11";
    case GroupId::N3: return "n3";
    case GroupId::SL2R: return "sl2r";
  }
  return "?";
}

GroupId parse_group(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (GroupId id : kAllGroups) {
    if (group_name(id) == lower) return id;
  }
  throw Error(ErrorKind::Usage, "unknown group '" + std::string(name) + "' (expected so3, se2, se3, e11, n3, sl2r)");
}

// ---------------------------------------------------------------------------
// BilinearTable

BilinearTable BilinearTable::symmetric_part() const {
  BilinearTable out(dim());
  for (int k = 0; k < dim(); ++k) out.slice(k) = 0.5 * (slice(k) + slice(k).transpose());
  return out;
}

BilinearTable BilinearTable::antisymmetric_part() const {
  BilinearTable out(dim());
  for (int k = 0; k < dim(); ++k) out.slice(k) = 0.5 * (slice(k) - slice(k).transpose());
  return out;
}

double BilinearTable::max_abs() const {
  double m = 0.0;
  for (const auto& s : slices_) m = std::max(m, s.cwiseAbs().maxCoeff());
  return m;
}

BilinearTable& BilinearTable::operator+=(const BilinearTable& other) {
  if (other.dim() != dim()) throw Error(ErrorKind::Dimension, "bilinear table size mismatch");
  for (int k = 0; k < dim(); ++k) slice(k) += other.slice(k);
  return *this;
}

BilinearTable& BilinearTable::operator*=(double s) {
  for (auto& m : slices_) m *= s;
  return *this;
}

BilinearTable operator+(BilinearTable a, const BilinearTable& b) { return a += b; }
BilinearTable operator-(BilinearTable a, const BilinearTable& b) { return a += (-1.0) * b; }
BilinearTable operator*(double s, BilinearTable a) { return a *= s; }

// ---------------------------------------------------------------------------
// Catalog

namespace {

GroupMat unit(int dim, int r, int c) {
  GroupMat m = GroupMat::Zero(dim, dim);
  m(r, c) = 1.0;
  return m;
}

std::array<GroupMat, 3> so3_basis(int dim) {
  return {unit(dim, 2, 1) - unit(dim, 1, 2), unit(dim, 0, 2) - unit(dim, 2, 0), unit(dim, 1, 0) - unit(dim, 0, 1)};
}

}  // namespace

GroupSpec::GroupSpec(GroupId id, int matrix_dim, std::vector<GroupMat> basis, std::vector<std::string> names)
    : id_(id), matrix_dim_(matrix_dim), basis_(std::move(basis)), basis_names_(std::move(names)) {
  const int n = algebra_dim();
  const int m2 = matrix_dim_ * matrix_dim_;
  vectorized_.resize(m2, n);
  for (int i = 0; i < n; ++i) vectorized_.col(i) = basis_[static_cast<std::size_t>(i)].reshaped();
  const Eigen::MatrixXd gram = vectorized_.transpose() * vectorized_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) {
    throw Error(ErrorKind::Closure, "basis of " + std::string(group_name(id)) + " is linearly dependent");
  }
  projector_ = ldlt.solve(vectorized_.transpose());

  structure_ = BilinearTable(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const GroupMat& a = basis_[static_cast<std::size_t>(i)];
      const GroupMat& b = basis_[static_cast<std::size_t>(j)];
      const GroupMat comm = a * b - b * a;
      double residual = 0.0;
      const AlgVec c = project(comm, &residual);
      if (residual > kProjectionAbsTol) {
        throw Error(ErrorKind::Closure, "bracket of basis elements leaves the span of the basis");
      }
      for (int k = 0; k < n; ++k) {
        structure_(k, i, j) = c[k];
        structure_(k, j, i) = -c[k];
      }
    }
  }
}

AlgVec GroupSpec::project(const GroupMat& m, double* residual) const {
  if (m.rows() != matrix_dim_ || m.cols() != matrix_dim_) {
    throw Error(ErrorKind::Dimension, "expected a " + std::to_string(matrix_dim_) + "x" +
                                          std::to_string(matrix_dim_) + " matrix for " + std::string(name()));
  }
  const auto v = m.reshaped();
  AlgVec c = projector_ * v;
  if (residual != nullptr) *residual = (vectorized_ * c - v).norm();
  return c;
}

AlgVec GroupSpec::coords_of(const GroupMat& m) const {
  double residual = 0.0;
  AlgVec c = project(m, &residual);
  if (!(residual <= kProjectionAbsTol + kProjectionRelTol * m.norm())) {
    throw Error(ErrorKind::NotInAlgebra, "matrix is not in the span of the " + std::string(name()) +
                                             " basis (residual " + std::to_string(residual) + ")");
  }
  return c;
}

GroupMat GroupSpec::matrix_of(const AlgVec& coords) const {
  if (coords.size() != algebra_dim()) throw Error(ErrorKind::Dimension, "coordinate vector has the wrong length");
  GroupMat m = GroupMat::Zero(matrix_dim_, matrix_dim_);
  for (int i = 0; i < algebra_dim(); ++i) m += coords[i] * basis_[static_cast<std::size_t>(i)];
  return m;
}

double GroupSpec::membership_defect(const GroupMat& g) const {
  const int d = matrix_dim_;
  if (g.rows() != d || g.cols() != d) {
    throw Error(ErrorKind::Dimension, "expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix for " +
                                          std::string(name()));
  }
  if (!g.allFinite()) return std::numeric_limits<double>::infinity();

  auto rotation_defect = [](const auto& r) {
    const auto k = r.rows();
    return (r.transpose() * r - Eigen::MatrixXd::Identity(k, k)).norm() + std::abs(r.determinant() - 1.0);
  };
  auto affine_row_defect = [&](void) {
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(d);
    expected[d - 1] = 1.0;
    return (g.row(d - 1).transpose() - expected).norm();
  };

  switch (id_) {
    case GroupId::SO3:
      return rotation_defect(g);
    case GroupId::SE3:
    case GroupId::SE2:
      return rotation_defect(g.topLeftCorner(d - 1, d - 1)) + affine_row_defect();
    case GroupId::E11: {
      double defect = std::abs(g(0, 1)) + std::abs(g(1, 0)) + std::abs(g(0, 0) * g(1, 1) - 1.0) + affine_row_defect();
      if (g(0, 0) <= 0.0) defect += 1.0 + std::abs(g(0, 0));
      return defect;
    }
    case GroupId::N3:
      return std::abs(g(0, 0) - 1.0) + std::abs(g(1, 1) - 1.0) + std::abs(g(2, 2) - 1.0) + std::abs(g(1, 0)) +
             std::abs(g(2, 0)) + std::abs(g(2, 1));
    case GroupId::SL2R:
      return std::abs(g.determinant() - 1.0);
  }
  return std::numeric_limits<double>::infinity();
}

const GroupSpec& group(GroupId id) {
  static const GroupSpec so3 = [] {
    auto b = so3_basis(3);
    return GroupSpec(GroupId::SO3, 3, {b[0], b[1], b[2]}, {"E1", "E2", "E3"});
  }();
  static const GroupSpec se3 = [] {
    auto b = so3_basis(4);
    return GroupSpec(GroupId::SE3, 4, {b[0], b[1], b[2], unit(4, 0, 3), unit(4, 1, 3), unit(4, 2, 3)},
                     {"E1", "E2", "E3", "e1", "e2", "e3"});
  }();
  static const GroupSpec se2(GroupId::SE2, 3, {unit(3, 1, 0) - unit(3, 0, 1), unit(3, 0, 2), unit(3, 1, 2)},
                             {"H", "e1", "e2"});
  // Algebra elements keep 0 in the (3,3) slot (affine convention).
  static const GroupSpec e11(GroupId::E11, 3, {unit(3, 0, 0) - unit(3, 1, 1), unit(3, 0, 2), unit(3, 1, 2)},
                             {"H", "e1", "e2"});
  static const GroupSpec n3(GroupId::N3, 3, {unit(3, 0, 1), unit(3, 1, 2), unit(3, 0, 2)}, {"X", "Y", "Z"});
  static const GroupSpec sl2r(GroupId::SL2R, 2, {unit(2, 0, 0) - unit(2, 1, 1), unit(2, 0, 1), unit(2, 1, 0)},
                              {"H", "E+", "E-"});
  switch (id) {
    case GroupId::SO3: return so3;
    case GroupId::SE2: return se2;
    case GroupId::SE3: return se3;
    case GroupId::E11: return e11;
    case GroupId::N3: return n3;
    case GroupId::SL2R: return sl2r;
  }
  throw Error(ErrorKind::Unsupported, "unknown group id");
}

// ---------------------------------------------------------------------------
// AlgebraVector and free functions

AlgebraVector::AlgebraVector(const GroupSpec& g, AlgVec c) : group(&g), coords(std::move(c)) {
  if (coords.size() != g.algebra_dim()) {
    throw Error(ErrorKind::Dimension, "coordinate vector length " + std::to_string(coords.size()) +
                                          " does not match algebra dimension " + std::to_string(g.algebra_dim()));
  }
}

AlgebraVector AlgebraVector::basis(const GroupSpec& g, int i) {
  AlgVec c = AlgVec::Zero(g.algebra_dim());
  c[i] = 1.0;
  return {g, c};
}

void require_same_group(const GroupSpec& a, const GroupSpec& b, const char* op) {
  if (&a != &b) {
    throw Error(ErrorKind::GroupMismatch, std::string(op) + ": operands belong to " + std::string(a.name()) +
                                              " and " + std::string(b.name()));
  }
}

namespace {
const GroupSpec& spec_of(const AlgebraVector& a, const char* op) {
  if (a.group == nullptr) throw Error(ErrorKind::GroupMismatch, std::string(op) + ": vector has no group");
  return *a.group;
}
}  // namespace

AlgebraVector operator+(const AlgebraVector& a, const AlgebraVector& b) {
  require_same_group(spec_of(a, "+"), spec_of(b, "+"), "+");
  return {*a.group, a.coords + b.coords};
}

AlgebraVector operator-(const AlgebraVector& a, const AlgebraVector& b) {
  require_same_group(spec_of(a, "-"), spec_of(b, "-"), "-");
  return {*a.group, a.coords - b.coords};
}

AlgebraVector operator*(double s, const AlgebraVector& a) { return {spec_of(a, "*"), s * a.coords}; }

AlgebraVector bracket(const AlgebraVector& a, const AlgebraVector& b) {
  const GroupSpec& g = spec_of(a, "bracket");
  require_same_group(g, spec_of(b, "bracket"), "bracket");
  const GroupMat ma = g.matrix_of(a.coords);
  const GroupMat mb = g.matrix_of(b.coords);
  double residual = 0.0;
  const GroupMat comm = ma * mb - mb * ma;
  AlgVec c = g.project(comm, &residual);
  if (!(residual <= GroupSpec::kProjectionAbsTol + GroupSpec::kProjectionRelTol * comm.norm())) {
    throw Error(ErrorKind::Closure, "commutator left the algebra of " + std::string(g.name()));
  }
  return {g, c};
}

const BilinearTable& structure_constants(const GroupSpec& spec) { return spec.structure_constants(); }

AlgVec adjoint_coords(const GroupSpec& spec, const GroupMat& g, const AlgVec& a) {
  const GroupMat conj = g * spec.matrix_of(a) * g.inverse();
  double residual = 0.0;
  AlgVec c = spec.project(conj, &residual);
  if (!(residual <= GroupSpec::kProjectionAbsTol * 1e3 + GroupSpec::kProjectionRelTol * conj.norm())) {
    throw Error(ErrorKind::Closure, "Ad(g)A left the algebra of " + std::string(spec.name()));
  }
  return c;
}

AlgMat adjoint_matrix(const GroupSpec& spec, const GroupMat& g) {
  const int n = spec.algebra_dim();
  AlgMat m(n, n);
  const GroupMat ginv = g.inverse();
  for (int i = 0; i < n; ++i) {
    m.col(i) = spec.project(g * spec.basis()[static_cast<std::size_t>(i)] * ginv, nullptr);
  }
  return m;
}

AlgebraVector Ad(const GroupMat& g, const AlgebraVector& a) {
  const GroupSpec& spec = spec_of(a, "Ad");
  const double defect = spec.membership_defect(g);
  if (!(defect <= GroupSpec::kMembershipTol)) {
    throw Error(ErrorKind::Membership, "Ad: matrix is not in " + std::string(spec.name()) + " (defect " +
                                           std::to_string(defect) + ")");
  }
  return {spec, adjoint_coords(spec, g, a.coords)};
}

GroupMat to_matrix(const AlgebraVector& a) { return spec_of(a, "to_matrix").matrix_of(a.coords); }

AlgebraVector from_matrix(const GroupSpec& spec, const GroupMat& m) { return {spec, spec.coords_of(m)}; }

double membership_defect(const GroupSpec& spec, const GroupMat& g) { return spec.membership_defect(g); }

}  // namespace stochlie
