#include "stochlie/explog.hpp"

#include <string>

namespace stochlie {

AlgebraConnection::AlgebraConnection(const GroupSpec& g)
    : group_(&g), christoffels_(g.algebra_dim()), flat_(true) {}

AlgebraConnection::AlgebraConnection(const GroupSpec& g, BilinearTable christoffels)
    : group_(&g), christoffels_(std::move(christoffels)) {
  if (christoffels_.dim() != g.algebra_dim()) throw Error(ErrorKind::Dimension, "Christoffel table has the wrong size");
  if (christoffels_.antisymmetric_part().max_abs() > 1e-12) {
    throw Error(ErrorKind::Precondition, "connection on the algebra must be symmetric (torsion-free)");
  }
  flat_ = christoffels_.max_abs() == 0.0;
}

GroupPath exponentiate_increments(const GroupSpec& g, const TimeGrid& grid, const PathMatrix& increments) {
  if (increments.rows() != grid.steps || increments.cols() != g.algebra_dim()) {
    throw Error(ErrorKind::Dimension, "increment matrix must be steps x algebra_dim");
  }
  std::vector<GroupMat> values;
  values.reserve(static_cast<std::size_t>(grid.steps + 1));
  values.push_back(GroupMat::Identity(g.matrix_dim(), g.matrix_dim()));
  for (int k = 0; k < grid.steps; ++k) {
    const AlgVec inc = increments.row(k).transpose();
    GroupMat next = values.back() * mat_exp(g.matrix_of(inc));
    const double defect = g.membership_defect(next);
    if (!(defect <= GroupSpec::kMembershipTol)) {
      throw Error(ErrorKind::IntegratorDrift, "state " + std::to_string(k + 1) + " left " + std::string(g.name()) +
                                                  " (defect " + std::to_string(defect) + ")");
    }
    values.push_back(std::move(next));
  }
  return {g, grid, std::move(values)};
}

GroupPath strat_exponential(const AlgebraPath& l) {
  return exponentiate_increments(l.spec(), l.grid, l.increments());
}

AlgebraPath strat_logarithm(const GroupPath& x) {
  return AlgebraPath::from_increments(x.spec(), x.grid, mc_increments(x));
}

GroupPath ito_exponential(const AlgebraPath& m, const ConnectionFunction& alpha) {
  return ito_exponential(m, alpha, AlgebraConnection(m.spec()));
}

GroupPath ito_exponential(const AlgebraPath& m, const ConnectionFunction& alpha, const AlgebraConnection& nabla) {
  require_same_group(m.spec(), alpha.group(), "ito_exponential");
  require_same_group(m.spec(), nabla.group(), "ito_exponential");
  PathMatrix inc = m.increments();
  for (int k = 0; k < inc.rows(); ++k) {
    const AlgVec dm = inc.row(k).transpose();
    AlgVec dl = dm - 0.5 * alpha.quadratic(dm);
    if (!nabla.flat()) dl += 0.5 * nabla.quadratic(dm);
    inc.row(k) = dl.transpose();
  }
  return exponentiate_increments(m.spec(), m.grid, inc);
}

AlgebraPath ito_logarithm(const GroupPath& x, const ConnectionFunction& alpha) {
  return ito_logarithm(x, alpha, AlgebraConnection(x.spec()));
}

AlgebraPath ito_logarithm(const GroupPath& x, const ConnectionFunction& alpha, const AlgebraConnection& nabla) {
  require_same_group(x.spec(), alpha.group(), "ito_logarithm");
  require_same_group(x.spec(), nabla.group(), "ito_logarithm");
  PathMatrix inc = mc_increments(x);
  for (int k = 0; k < inc.rows(); ++k) {
    const AlgVec dl = inc.row(k).transpose();
    AlgVec dn = dl + 0.5 * alpha.quadratic(dl);
    if (!nabla.flat()) dn -= 0.5 * nabla.quadratic(dl);
    inc.row(k) = dn.transpose();
  }
  return AlgebraPath::from_increments(x.spec(), x.grid, inc);
}

GroupPath translate_initial(const GroupMat& xi, const GroupPath& x) {
  const GroupSpec& g = x.spec();
  const double defect = g.membership_defect(xi);
  if (!(defect <= GroupSpec::kMembershipTol)) {
    throw Error(ErrorKind::Membership, "translation is not in " + std::string(g.name()));
  }
  std::vector<GroupMat> values;
  values.reserve(x.values.size());
  for (const auto& m : x.values) values.push_back(xi * m);
  return {g, x.grid, std::move(values)};
}

}  // namespace stochlie
