#pragma once

#include <string>
#include <vector>

#include "stochlie/groups.hpp"

namespace stochlie {

/// Left-invariant metric given by its Gram matrix on the algebra basis.
class MetricSpec {
 public:
  MetricSpec(const GroupSpec& group, AlgMat gram, double lambda);

  const GroupSpec& group() const { return *group_; }
  const AlgMat& gram() const { return gram_; }
  double lambda() const { return lambda_; }
  double inner(const AlgVec& a, const AlgVec& b) const { return a.dot(gram_ * b); }

 private:
  const GroupSpec* group_;
  AlgMat gram_;
  double lambda_;
};

/// The catalog inner product <,>_lambda: -1/2 tr(AB) on rotation blocks
/// (identity on the so(3) basis) plus lambda^2 on translation and nilpotent
/// directions; diag(1, lambda^2, lambda^2) for the three-dimensional groups.
MetricSpec standard_metric(const GroupSpec& group, double lambda);

/// Connection function alpha with alpha(e_i, e_j) = sum_k coeffs(k, i, j) e_k.
class ConnectionFunction {
 public:
  ConnectionFunction(const GroupSpec& group, BilinearTable coeffs, std::string label);

  const GroupSpec& group() const { return *group_; }
  const BilinearTable& coeffs() const { return coeffs_; }
  /// Symmetric part in (i, j); this is all alpha(A, A) ever sees.
  const BilinearTable& symmetric() const { return symmetric_; }
  const std::string& label() const { return label_; }
  /// alpha(A, A) = 0 for every A, i.e. the symmetric part is exactly zero.
  bool kills_diagonal(double tol = 1e-12) const { return symmetric_.max_abs() <= tol; }

  /// alpha(a, a) on raw coordinates, evaluated through the symmetric part.
  AlgVec quadratic(const AlgVec& a) const { return symmetric_.apply(a, a); }

 private:
  const GroupSpec* group_;
  BilinearTable coeffs_;
  BilinearTable symmetric_;
  std::string label_;
};

/// U with 2<U(A,B),C> = <A,[C,B]> + <[C,A],B>, solved basis pair by basis
/// pair against the Gram matrix.
ConnectionFunction u_from_metric(const MetricSpec& metric);
ConnectionFunction alpha_levi_civita(const MetricSpec& metric);
ConnectionFunction alpha_biinvariant(const GroupSpec& group);
AlgebraVector eval_alpha(const ConnectionFunction& alpha, const AlgebraVector& a, const AlgebraVector& b);

enum class ClosedFormDisplay {
  /// The expression given for U(L, L) itself.
  UDisplay,
  /// The integrand printed inside the martingale criterion. Only N3 differs.
  CompensatorDisplay,
};

/// Literal closed-form U(L, L) for se3, se2, e11, n3 and sl2r, polarized into
/// a symmetric table. so3 is rejected as unsupported.
ConnectionFunction closed_form_u(GroupId id, double lambda, ClosedFormDisplay display = ClosedFormDisplay::UDisplay);
/// The same quadratic map, evaluated directly on coordinates.
AlgVec closed_form_quadratic(GroupId id, double lambda, const AlgVec& coords,
                             ClosedFormDisplay display = ClosedFormDisplay::UDisplay);

struct RegressionEntry {
  int i = 0;
  int j = 0;
  int k = 0;
  double oracle = 0.0;
  double closed = 0.0;
  double delta() const { return closed - oracle; }
};

struct RegressionCase {
  GroupId group = GroupId::SE3;
  double lambda = 1.0;
  ClosedFormDisplay display = ClosedFormDisplay::UDisplay;
  double max_abs_delta = 0.0;
  bool agrees = false;  // max |delta| <= tolerance
  std::vector<RegressionEntry> discrepancies;  // entries with |delta| > tolerance
  std::string note;
};

struct RegressionReport {
  double tolerance = 1e-10;
  std::vector<RegressionCase> cases;
  const RegressionCase* find(GroupId group, double lambda,
                             ClosedFormDisplay display = ClosedFormDisplay::UDisplay) const;
};

/// Compares each closed form with the metric oracle on every basis pair and
/// reports disagreements as data. `override_se3` lets a fixture substitute a
/// tampered SE(3) table.
RegressionReport regress_closed_forms(const std::vector<double>& lambdas, double tolerance = 1e-10,
                                      const BilinearTable* override_se3 = nullptr);

}  // namespace stochlie
