#include "stochlie/calculus.hpp"

#include <string>

namespace stochlie {

LeftInvariantOneForm::LeftInvariantOneForm(const GroupSpec& g, AlgVec c) : group(&g), covector(std::move(c)) {
  if (covector.size() != g.algebra_dim()) throw Error(ErrorKind::Dimension, "covector length must equal algebra_dim");
  if (!covector.allFinite()) throw Error(ErrorKind::Range, "covector is not finite");
}

PathMatrix mc_increments(const GroupPath& x) {
  const GroupSpec& g = x.spec();
  PathMatrix out(x.steps(), g.algebra_dim());
  for (int k = 0; k < x.steps(); ++k) {
    const GroupMat& a = x.values[static_cast<std::size_t>(k)];
    const GroupMat& b = x.values[static_cast<std::size_t>(k + 1)];
    GroupMat step;
    try {
      step = mat_log(GroupMat(a.inverse() * b));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Range) throw;
      throw Error(ErrorKind::Range, "increment " + std::to_string(k) + " too large for the logarithm (" + e.what() +
                                        "); use a smaller time step");
    }
    out.row(k) = g.coords_of(step).transpose();
  }
  return out;
}

namespace {
void require_group(const GroupSpec& expected, const GroupSpec& got, const char* op) {
  require_same_group(expected, got, op);
}

Eigen::VectorXd running(const Eigen::VectorXd& per_step) {
  Eigen::VectorXd out(per_step.size() + 1);
  out[0] = 0.0;
  for (Eigen::Index k = 0; k < per_step.size(); ++k) out[k + 1] = out[k] + per_step[k];
  return out;
}
}  // namespace

Eigen::VectorXd strat_integral(const LeftInvariantOneForm& eta, const PathMatrix& increments) {
  return running(increments * eta.covector);
}

Eigen::VectorXd ito_integral(const LeftInvariantOneForm& eta, const PathMatrix& increments,
                             const ConnectionFunction& alpha) {
  require_group(alpha.group(), *eta.group, "ito_integral");
  Eigen::VectorXd per_step(increments.rows());
  for (Eigen::Index k = 0; k < increments.rows(); ++k) {
    const AlgVec dl = increments.row(k).transpose();
    per_step[k] = eta.covector.dot(dl + 0.5 * alpha.quadratic(dl));
  }
  return running(per_step);
}

Eigen::VectorXd quadratic_integral(const AlgMat& b, const PathMatrix& increments) {
  if (b.rows() != increments.cols() || b.cols() != increments.cols()) {
    throw Error(ErrorKind::Dimension, "bilinear form does not match the algebra dimension");
  }
  Eigen::VectorXd per_step(increments.rows());
  for (Eigen::Index k = 0; k < increments.rows(); ++k) {
    const AlgVec dl = increments.row(k).transpose();
    per_step[k] = dl.dot(b * dl);
  }
  return running(per_step);
}

Eigen::VectorXd strat_integral(const LeftInvariantOneForm& eta, const GroupPath& x) {
  require_group(x.spec(), *eta.group, "strat_integral");
  return strat_integral(eta, mc_increments(x));
}

Eigen::VectorXd ito_integral(const LeftInvariantOneForm& eta, const GroupPath& x, const ConnectionFunction& alpha) {
  require_group(x.spec(), *eta.group, "ito_integral");
  return ito_integral(eta, mc_increments(x), alpha);
}

Eigen::VectorXd quadratic_integral(const AlgMat& b, const GroupPath& x) {
  return quadratic_integral(b, mc_increments(x));
}

AlgMat contract(const LeftInvariantOneForm& eta, const ConnectionFunction& alpha) {
  require_group(alpha.group(), *eta.group, "contract");
  const int n = alpha.group().algebra_dim();
  AlgMat b = AlgMat::Zero(n, n);
  for (int k = 0; k < n; ++k) b += eta.covector[k] * alpha.symmetric().slice(k);
  return b;
}

}  // namespace stochlie
