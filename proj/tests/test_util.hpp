#pragma once

#include <cstdint>
#include <random>

#include "doctest.h"
#include "stochlie/explog.hpp"

namespace testing {

using namespace stochlie;

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(0x5eedULL);
  return engine;
}

inline double uniform(double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline AlgVec random_coords(int n, double scale = 1.0) {
  AlgVec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * uniform();
  return v;
}

inline AlgebraVector random_element(const GroupSpec& g, double scale = 1.0) {
  return {g, random_coords(g.algebra_dim(), scale)};
}

/// A group element exp(A) for a random algebra element of the given size.
inline GroupMat random_member(const GroupSpec& g, double scale = 0.5) {
  return mat_exp(g.matrix_of(random_coords(g.algebra_dim(), scale)));
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a stochlie::Error");
  return ErrorKind::Usage;
}

inline AlgMat unit_cov(const GroupSpec& g) { return AlgMat::Identity(g.algebra_dim(), g.algebra_dim()); }

inline AlgebraPath line_path(const GroupSpec& g, const TimeGrid& grid, const AlgVec& a) {
  PathMatrix v(grid.steps + 1, g.algebra_dim());
  for (int k = 0; k <= grid.steps; ++k) v.row(k) = grid.t(k) * a.transpose();
  return AlgebraPath(g, grid, v);
}

}  // namespace testing
