#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stochlie/groups.hpp"

namespace stochlie {

/// Row k holds the state at grid point k.
using PathMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TimeGrid {
  double horizon = 1.0;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double horizon_, int steps_);
  double dt() const { return horizon / steps; }
  double t(int k) const { return k * dt(); }
  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* op);

/// Discretized algebra-valued semimartingale: (steps + 1) x n coordinates.
struct AlgebraPath {
  const GroupSpec* group = nullptr;
  TimeGrid grid;
  PathMatrix values;

  AlgebraPath() = default;
  AlgebraPath(const GroupSpec& g, TimeGrid grid_, PathMatrix v);
  static AlgebraPath zero(const GroupSpec& g, TimeGrid grid_);

  const GroupSpec& spec() const { return *group; }
  int steps() const { return grid.steps; }
  AlgVec state(int k) const { return values.row(k).transpose(); }
  AlgVec increment(int k) const { return (values.row(k + 1) - values.row(k)).transpose(); }
  /// steps x n matrix of increments
  PathMatrix increments() const;
  /// Builds a path from increments, starting at zero.
  static AlgebraPath from_increments(const GroupSpec& g, TimeGrid grid_, const PathMatrix& increments);
};

AlgebraPath operator+(const AlgebraPath& a, const AlgebraPath& b);
AlgebraPath operator-(const AlgebraPath& a, const AlgebraPath& b);

/// Discretized group-valued semimartingale.
struct GroupPath {
  const GroupSpec* group = nullptr;
  TimeGrid grid;
  std::vector<GroupMat> values;

  GroupPath() = default;
  GroupPath(const GroupSpec& g, TimeGrid grid_, std::vector<GroupMat> v);
  static GroupPath constant(const GroupSpec& g, TimeGrid grid_, const GroupMat& value);

  const GroupSpec& spec() const { return *group; }
  int steps() const { return grid.steps; }
  /// Matrix entries flattened row-major: (steps + 1) x m^2.
  PathMatrix coordinates() const;
  double max_membership_defect() const;
};

template <typename Path>
struct Ensemble {
  std::uint64_t base_seed = 0;
  std::vector<Path> paths;
  /// Covariance of the flat driver the ensemble was generated from, if any.
  std::optional<AlgMat> driver_covariance;

  std::size_t replicas() const { return paths.size(); }
};

// ---------------------------------------------------------------------------
// Seeding and random numbers
//
// Replica streams are keyed by derive_seed(base_seed, replica, stream), and
// the i-th standard normal of a stream is a pure function of (key, i): it is
// a SplitMix64 output at counter position i, paired through Box-Muller. Any
// (replica, step) can therefore be generated in any order or on any worker.

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t replica, std::uint64_t stream = 0);

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const;
  /// Fills `out` with the standard normals at positions first, first + 1, ...
  /// `first` must be even.
  void normals(std::uint64_t first, std::span<double> out) const;

 private:
  std::uint64_t key_;
};

/// Counter offset of the first normal of step k for an n-component driver.
inline std::uint64_t step_counter(int k, int n) {
  return static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n + (n & 1));
}

/// Lower Cholesky factor; throws metric error unless cov is symmetric positive definite.
AlgMat cholesky_factor(const AlgMat& cov);

/// Flat Brownian motion in the algebra coordinates with covariance cov * t.
AlgebraPath brownian_driver(const GroupSpec& g, const TimeGrid& grid, std::uint64_t seed, const AlgMat& covariance);
/// dM = drift dt + diffusion dW.
AlgebraPath drift_diffusion_driver(const GroupSpec& g, const TimeGrid& grid, std::uint64_t seed, const AlgVec& drift,
                                   const AlgMat& diffusion);

// ---------------------------------------------------------------------------
// Quadratic covariation

/// Running realized covariation sum_{m<k} dP_m dQ_m^T, one p x q matrix per grid point.
std::vector<Eigen::MatrixXd> quadratic_covariation(const PathMatrix& p, const PathMatrix& q);
std::vector<Eigen::MatrixXd> quadratic_covariation(const AlgebraPath& p, const AlgebraPath& q);
Eigen::MatrixXd terminal_covariation(const PathMatrix& p, const PathMatrix& q);

struct NullQvResult {
  bool null_qv = false;
  Eigen::MatrixXd terminal;      // realized cross-covariation at the horizon
  Eigen::MatrixXd scale;         // sqrt(sum (dP_i dQ_j)^2), the CLT scale of each entry
  Eigen::MatrixXd z;             // terminal / scale (0 where both vanish)
  double critical = 0.0;         // Bonferroni two-sided normal quantile
  double max_abs_z = 0.0;
  int tested_entries = 0;
};

/// Tests whether every terminal cross-covariation entry is compatible with
/// zero. `significance` is the family-wise confidence level (0.99 means a 1%
/// false-rejection rate shared across all tested entries).
NullQvResult null_qv_check(const PathMatrix& p, const PathMatrix& q, double significance);
NullQvResult null_qv_check(const AlgebraPath& p, const AlgebraPath& q, double significance);
NullQvResult null_qv_check(const GroupPath& p, const GroupPath& q, double significance);

/// Standard normal quantile.
double normal_quantile(double p);

// ---------------------------------------------------------------------------
// Replica parallelism

/// Runs body(i) for i in [0, count) on `workers` threads. Results must be
/// written to per-index slots so the outcome never depends on scheduling.
/// The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace stochlie
