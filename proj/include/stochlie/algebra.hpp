#pragma once

// Dense small-matrix kernels shared by every other module. Everything here is
// templated on the Eigen expression type so fixed-size, max-size and fully
// dynamic matrices all work; callers in this library mostly use the bounded
// aliases below to stay allocation-free in the integrator loops.

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "stochlie/errors.hpp"

namespace stochlie {

/// Group matrices are at most 4x4 (SE(3) in homogeneous form).
using GroupMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;
/// Algebra coordinate vectors have at most 6 entries (se(3)).
using AlgVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 6, 1>;
/// Square tables over algebra coordinates (Gram matrices, bilinear slices).
using AlgMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 6, 6>;

struct Tolerance {
  double abs_tol = 1e-12;
  double rel_tol = 1e-9;

  Tolerance() = default;
  Tolerance(double abs, double rel) : abs_tol(abs), rel_tol(rel) {
    if (!(abs >= 0.0) || !(rel >= 0.0) || (abs == 0.0 && rel == 0.0)) {
      throw Error(ErrorKind::Range, "tolerance needs non-negative bounds with one strictly positive");
    }
  }

  /// |a - b| <= abs_tol + rel_tol * max(|a|, |b|)
  bool close(double a, double b) const {
    return std::abs(a - b) <= abs_tol + rel_tol * std::max(std::abs(a), std::abs(b));
  }
};

namespace detail {

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* op) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorKind::Dimension, std::string(op) + ": expected a non-empty square matrix, got " +
                                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* op) {
  if (!a.allFinite()) throw Error(ErrorKind::Range, std::string(op) + ": non-finite entries");
}

template <typename Derived>
typename Derived::RealScalar norm1(const Eigen::MatrixBase<Derived>& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace detail

/// Matrix exponential by scaling and squaring around a Taylor series.
///
/// The argument is scaled by 2^-s until its 1-norm is at most 1/2, the series
/// is summed until the next term no longer changes the result, and the
/// result is squared s times. Nilpotent inputs terminate the series exactly.
template <typename Derived>
typename Derived::PlainObject mat_exp(const Eigen::MatrixBase<Derived>& a) {
  using Plain = typename Derived::PlainObject;
  using Scalar = typename Derived::Scalar;
  detail::require_square(a, "mat_exp");
  detail::require_finite(a, "mat_exp");

  const auto n = a.rows();
  const Scalar norm = detail::norm1(a);
  int squarings = 0;
  if (norm > Scalar(0.5)) squarings = static_cast<int>(std::ceil(std::log2(norm / Scalar(0.5))));
  const Scalar scale = std::ldexp(Scalar(1), -squarings);

  Plain scaled = a * scale;
  Plain result = Plain::Identity(n, n);
  Plain term = Plain::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = (term * scaled) / Scalar(k);
    result += term;
    if (detail::norm1(term) <= std::numeric_limits<Scalar>::epsilon() * Scalar(0.25)) break;
  }
  for (int i = 0; i < squarings; ++i) result = (result * result).eval();
  return result;
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Square roots (Denman-Beavers) are taken until the Cayley variable
/// z = (M - I)(M + I)^-1 is small, then log M = 2 atanh(z) is summed as an odd
/// series and rescaled. Near-identity inputs, which is what the integrators
/// feed in, need no square roots at all.
template <typename Derived>
typename Derived::PlainObject mat_log(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  using Scalar = typename Derived::Scalar;
  detail::require_square(m, "mat_log");
  detail::require_finite(m, "mat_log");

  const auto n = m.rows();
  const Plain id = Plain::Identity(n, n);
  Plain x = m;

  {
    Eigen::PartialPivLU<Plain> lu(x);
    const Scalar scale = std::max(Scalar(1), detail::norm1(x));
    if (!(std::abs(lu.determinant()) > Scalar(1e-14) * std::pow(scale, Scalar(n))) ||
        lu.rcond() < Scalar(1e-13)) {
      throw Error(ErrorKind::Singularity, "mat_log: matrix is singular");
    }
  }

  constexpr int kMaxRoots = 40;
  constexpr Scalar kCayleyBound = Scalar(0.25);
  int roots = 0;
  Plain z;
  for (;;) {
    Eigen::PartialPivLU<Plain> lu(x + id);
    if (lu.rcond() < Scalar(1e-12)) {
      throw Error(ErrorKind::Range,
                  "mat_log: spectrum touches the negative real axis; reduce the time step");
    }
    z = lu.solve(x - id);
    if (detail::norm1(z) <= kCayleyBound) break;
    if (++roots > kMaxRoots) {
      throw Error(ErrorKind::Range, "mat_log: no convergence; reduce the time step");
    }
    // Denman-Beavers iteration for the principal square root.
    Plain y = x;
    Plain w = id;
    for (int it = 0; it < 100; ++it) {
      Eigen::PartialPivLU<Plain> ly(y);
      Eigen::PartialPivLU<Plain> lw(w);
      if (ly.rcond() < Scalar(1e-13) || lw.rcond() < Scalar(1e-13)) {
        throw Error(ErrorKind::Range, "mat_log: square root iteration broke down; reduce the time step");
      }
      Plain y_next = Scalar(0.5) * (y + lw.inverse());
      Plain w_next = Scalar(0.5) * (w + ly.inverse());
      const Scalar delta = detail::norm1(y_next - y);
      y = std::move(y_next);
      w = std::move(w_next);
      if (delta <= Scalar(8) * std::numeric_limits<Scalar>::epsilon() * detail::norm1(y)) break;
    }
    if (!y.allFinite()) throw Error(ErrorKind::Range, "mat_log: square root diverged; reduce the time step");
    x = y;
  }

  const Plain z2 = z * z;
  Plain power = z;
  Plain series = z;
  for (int k = 1; k <= 60; ++k) {
    power = (power * z2).eval();
    const Plain term = power / Scalar(2 * k + 1);
    series += term;
    if (detail::norm1(term) <= std::numeric_limits<Scalar>::epsilon() * Scalar(0.25) * std::max(Scalar(1e-300), detail::norm1(series))) break;
  }
  Plain out = std::ldexp(Scalar(2), roots) * series;
  if (!out.allFinite()) throw Error(ErrorKind::Range, "mat_log: non-finite result; reduce the time step");
  return out;
}

/// Solves A x = b by partially pivoted LU, rejecting singular or badly
/// conditioned systems (reciprocal condition estimate below 1e-13).
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1> solve_linear(const Eigen::MatrixBase<DerivedA>& a,
                                                                         const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_square(a, "solve_linear");
  if (b.rows() != a.rows() || b.cols() != 1) {
    throw Error(ErrorKind::Dimension, "solve_linear: right-hand side has the wrong shape");
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense = a;
  Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(dense);
  if (!(lu.rcond() >= Scalar(1e-13))) throw Error(ErrorKind::Singularity, "solve_linear: matrix is singular");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = lu.solve(b);
  if (!x.allFinite()) throw Error(ErrorKind::Singularity, "solve_linear: non-finite solution");
  return x;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::RealScalar frobenius_dist(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::Dimension, "frobenius_dist: shape mismatch");
  }
  return (a - b).norm();
}

}  // namespace stochlie
