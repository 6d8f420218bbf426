#pragma once

#include "stochlie/connections.hpp"
#include "stochlie/paths.hpp"

namespace stochlie {

/// eta composed with the Maurer-Cartan form: a left-invariant 1-form given by
/// its covector on algebra coordinates.
struct LeftInvariantOneForm {
  const GroupSpec* group = nullptr;
  AlgVec covector;

  LeftInvariantOneForm(const GroupSpec& g, AlgVec c);
};

/// Left-trivialized one-step increments log(X_k^-1 X_{k+1}) in basis
/// coordinates, steps x n.
PathMatrix mc_increments(const GroupPath& x);

Eigen::VectorXd strat_integral(const LeftInvariantOneForm& eta, const GroupPath& x);
/// sum eta(dL + 1/2 alpha(dL, dL))
Eigen::VectorXd ito_integral(const LeftInvariantOneForm& eta, const GroupPath& x, const ConnectionFunction& alpha);
/// sum b(dL, dL) for a bilinear form b given as an n x n table.
Eigen::VectorXd quadratic_integral(const AlgMat& b, const GroupPath& x);

/// The bilinear form (A, B) -> eta(alpha(A, B)), symmetrized.
AlgMat contract(const LeftInvariantOneForm& eta, const ConnectionFunction& alpha);

// Increment-level forms of the above, for callers that already hold dL.
Eigen::VectorXd strat_integral(const LeftInvariantOneForm& eta, const PathMatrix& increments);
Eigen::VectorXd ito_integral(const LeftInvariantOneForm& eta, const PathMatrix& increments,
                             const ConnectionFunction& alpha);
Eigen::VectorXd quadratic_integral(const AlgMat& b, const PathMatrix& increments);

}  // namespace stochlie
