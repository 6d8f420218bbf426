#pragma once

#include "stochlie/calculus.hpp"

namespace stochlie {

/// Constant torsion-free connection on the algebra itself, as Christoffel
/// symbols gamma(k, i, j). The default is flat.
class AlgebraConnection {
 public:
  explicit AlgebraConnection(const GroupSpec& g);  // flat
  AlgebraConnection(const GroupSpec& g, BilinearTable christoffels);

  const GroupSpec& group() const { return *group_; }
  const BilinearTable& christoffels() const { return christoffels_; }
  bool flat() const { return flat_; }
  AlgVec quadratic(const AlgVec& a) const { return christoffels_.apply(a, a); }

 private:
  const GroupSpec* group_;
  BilinearTable christoffels_;
  bool flat_ = true;
};

/// X_{k+1} = X_k exp(dL_k), X_0 = identity.
GroupPath strat_exponential(const AlgebraPath& l);
/// Cumulative sum of the Maurer-Cartan increments.
AlgebraPath strat_logarithm(const GroupPath& x);

/// X_{k+1} = X_k exp(dM + 1/2 gamma(dM, dM) - 1/2 alpha(dM, dM)).
GroupPath ito_exponential(const AlgebraPath& m, const ConnectionFunction& alpha);
GroupPath ito_exponential(const AlgebraPath& m, const ConnectionFunction& alpha, const AlgebraConnection& nabla);
/// Cumulative sum of dL + 1/2 alpha(dL, dL) - 1/2 gamma(dL, dL), starting at 0.
AlgebraPath ito_logarithm(const GroupPath& x, const ConnectionFunction& alpha);
AlgebraPath ito_logarithm(const GroupPath& x, const ConnectionFunction& alpha, const AlgebraConnection& nabla);

/// Pointwise left translation xi X_k.
GroupPath translate_initial(const GroupMat& xi, const GroupPath& x);

/// Injects increments by the matrix exponential from the identity. Throws
/// integrator-drift when a state leaves the group by more than the
/// membership tolerance.
GroupPath exponentiate_increments(const GroupSpec& g, const TimeGrid& grid, const PathMatrix& increments);

}  // namespace stochlie
