#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stochlie/algebra.hpp"

namespace stochlie {

enum class GroupId { SO3, SE2, SE3, E11, N3, SL2R };

std::string_view group_name(GroupId id);
/// Accepts so3, se2, se3, e11, n3, sl2r in any case.
GroupId parse_group(std::string_view name);
inline constexpr GroupId kAllGroups[] = {GroupId::SO3, GroupId::SE2, GroupId::SE3,
                                         GroupId::E11, GroupId::N3,  GroupId::SL2R};

/// Rank-3 coefficient table over an n-dimensional algebra: slice k holds the
/// n x n matrix of coefficients of basis element k, so the bilinear map is
/// out_k = a^T slice(k) b.
class BilinearTable {
 public:
  BilinearTable() = default;
  explicit BilinearTable(int n) : slices_(static_cast<std::size_t>(n), AlgMat::Zero(n, n)) {}

  int dim() const { return static_cast<int>(slices_.size()); }
  AlgMat& slice(int k) { return slices_[static_cast<std::size_t>(k)]; }
  const AlgMat& slice(int k) const { return slices_[static_cast<std::size_t>(k)]; }
  double& operator()(int k, int i, int j) { return slice(k)(i, j); }
  double operator()(int k, int i, int j) const { return slice(k)(i, j); }

  template <typename DA, typename DB>
  AlgVec apply(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) const {
    AlgVec out(dim());
    for (int k = 0; k < dim(); ++k) out[k] = a.dot(slice(k) * b);
    return out;
  }

  /// The part symmetric in (i, j).
  BilinearTable symmetric_part() const;
  BilinearTable antisymmetric_part() const;
  double max_abs() const;

  BilinearTable& operator+=(const BilinearTable& other);
  BilinearTable& operator*=(double s);

 private:
  std::vector<AlgMat> slices_;
};

BilinearTable operator+(BilinearTable a, const BilinearTable& b);
BilinearTable operator-(BilinearTable a, const BilinearTable& b);
BilinearTable operator*(double s, BilinearTable a);

/// One of the catalog groups in its defining matrix embedding together with
/// the chosen basis of its Lie algebra. Instances are immutable and live in a
/// static catalog, so identity comparison is group comparison.
class GroupSpec {
 public:
  GroupId id() const { return id_; }
  std::string_view name() const { return group_name(id_); }
  int matrix_dim() const { return matrix_dim_; }
  int algebra_dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<GroupMat>& basis() const { return basis_; }
  const std::vector<std::string>& basis_names() const { return basis_names_; }
  const BilinearTable& structure_constants() const { return structure_; }

  /// Coordinates of A in the basis; throws not-in-algebra when the
  /// least-squares projection leaves a residual above tolerance.
  AlgVec coords_of(const GroupMat& m) const;
  /// Projection without the residual gate, together with the residual.
  AlgVec project(const GroupMat& m, double* residual) const;
  GroupMat matrix_of(const AlgVec& coords) const;
  double membership_defect(const GroupMat& g) const;

  /// Membership gate used by Ad, translate_initial and the integrators.
  static constexpr double kMembershipTol = 1e-6;
  /// Residual allowed when projecting a matrix onto the basis span.
  static constexpr double kProjectionAbsTol = 1e-10;
  static constexpr double kProjectionRelTol = 1e-9;

 private:
  friend const GroupSpec& group(GroupId id);
  GroupSpec(GroupId id, int matrix_dim, std::vector<GroupMat> basis, std::vector<std::string> names);

  GroupId id_;
  int matrix_dim_;
  std::vector<GroupMat> basis_;
  std::vector<std::string> basis_names_;
  Eigen::MatrixXd vectorized_;  // m^2 x n, column i = vec(basis_i)
  Eigen::MatrixXd projector_;   // n x m^2 least-squares pseudo-inverse
  BilinearTable structure_;
};

const GroupSpec& group(GroupId id);
inline const GroupSpec& group(std::string_view name) { return group(parse_group(name)); }

/// An element of a catalog algebra in basis coordinates.
struct AlgebraVector {
  const GroupSpec* group = nullptr;
  AlgVec coords;

  AlgebraVector() = default;
  AlgebraVector(const GroupSpec& g, AlgVec c);
  static AlgebraVector zero(const GroupSpec& g) { return {g, AlgVec::Zero(g.algebra_dim())}; }
  static AlgebraVector basis(const GroupSpec& g, int i);

  friend AlgebraVector operator+(const AlgebraVector& a, const AlgebraVector& b);
  friend AlgebraVector operator-(const AlgebraVector& a, const AlgebraVector& b);
  friend AlgebraVector operator*(double s, const AlgebraVector& a);
};

void require_same_group(const GroupSpec& a, const GroupSpec& b, const char* op);

AlgebraVector bracket(const AlgebraVector& a, const AlgebraVector& b);
/// c(k, i, j) with [e_i, e_j] = sum_k c(k, i, j) e_k.
const BilinearTable& structure_constants(const GroupSpec& spec);
/// Coordinates of g A g^-1; g must pass the membership gate.
AlgebraVector Ad(const GroupMat& g, const AlgebraVector& a);
/// Coordinate form of Ad: Ad(g) coords without the membership gate, for the
/// integrator loops where g is produced by the library itself.
AlgVec adjoint_coords(const GroupSpec& spec, const GroupMat& g, const AlgVec& a);
/// n x n matrix of Ad(g) acting on coordinates.
AlgMat adjoint_matrix(const GroupSpec& spec, const GroupMat& g);

GroupMat to_matrix(const AlgebraVector& a);
AlgebraVector from_matrix(const GroupSpec& spec, const GroupMat& m);
double membership_defect(const GroupSpec& spec, const GroupMat& g);

}  // namespace stochlie
