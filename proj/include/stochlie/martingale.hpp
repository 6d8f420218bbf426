#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "stochlie/explog.hpp"

namespace stochlie {

/// The compensated logarithm L(X) + 1/2 int alpha(dL, dL); identical to the
/// Ito logarithm with the flat algebra connection.
AlgebraPath compensator(const GroupPath& x, const ConnectionFunction& alpha);

struct DriftOptions {
  int buckets = 20;
  /// A cell passes when |z| < z_band.
  double z_band = 4.0;
  /// The verdict passes when at least this fraction of cells pass.
  double pass_fraction = 0.95;
  static constexpr int kMinReplicas = 100;
};

/// Zero-drift test of an ensemble: for every time bucket and component, the
/// mean increment across replicas is compared with its standard error.
struct DriftReport {
  std::string group;
  std::string connection;
  int replicas = 0;
  int buckets = 0;
  int components = 0;
  double z_band = 4.0;
  double pass_fraction_required = 0.95;
  Eigen::MatrixXd mean;  // buckets x components
  Eigen::MatrixXd se;
  Eigen::MatrixXd z;
  double max_abs_z = 0.0;
  double pass_fraction = 0.0;
  bool pass = false;
};

/// buckets x n matrix of per-bucket increments of one path.
PathMatrix bucket_increments(const AlgebraPath& path, int buckets);

/// Core reduction over per-replica bucket increments (each buckets x n).
/// Means use compensated summation in replica order.
DriftReport drift_statistics(std::span<const PathMatrix> per_replica, const DriftOptions& options);

DriftReport drift_test(std::span<const AlgebraPath> ensemble, const DriftOptions& options = {});

DriftReport martingale_verdict(std::span<const GroupPath> ensemble, const ConnectionFunction& alpha,
                               const DriftOptions& options = {});
/// Same computation, generating replica r with make_replica(r) on demand so
/// large ensembles never have to be held in memory.
DriftReport martingale_verdict(std::size_t replicas, const std::function<GroupPath(std::size_t)>& make_replica,
                               const ConnectionFunction& alpha, const DriftOptions& options = {}, int workers = 1);

struct QvLinearityReport {
  std::vector<double> ratios;  // per replica: terminal int b(dX, dX) / (n T)
  double mean_ratio = 0.0;
  double se = 0.0;
  double tolerance = 0.05;
  bool pass = false;
};

/// Realized quadratic integral of the metric against the Gram form. For a
/// driver with covariance equal to the inverse Gram matrix the terminal value
/// grows like n T. If the ensemble records its driver covariance, it must be
/// that inverse.
QvLinearityReport qv_linearity_check(const Ensemble<GroupPath>& ensemble, const MetricSpec& metric,
                                     double tolerance = 0.05);

}  // namespace stochlie
