#include "stochlie/martingale.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace stochlie {

AlgebraPath compensator(const GroupPath& x, const ConnectionFunction& alpha) { return ito_logarithm(x, alpha); }

PathMatrix bucket_increments(const AlgebraPath& path, int buckets) {
  if (buckets < 1 || path.steps() % buckets != 0) {
    throw Error(ErrorKind::Precondition, "bucket count " + std::to_string(buckets) + " does not divide " +
                                             std::to_string(path.steps()) + " steps");
  }
  const int width = path.steps() / buckets;
  PathMatrix out(buckets, path.values.cols());
  for (int b = 0; b < buckets; ++b) out.row(b) = path.values.row((b + 1) * width) - path.values.row(b * width);
  return out;
}

namespace {

/// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

DriftReport drift_statistics(std::span<const PathMatrix> per_replica, const DriftOptions& options) {
  const auto replicas = static_cast<int>(per_replica.size());
  if (replicas < DriftOptions::kMinReplicas) {
    throw Error(ErrorKind::Power, "drift test needs at least " + std::to_string(DriftOptions::kMinReplicas) +
                                      " replicas, got " + std::to_string(replicas));
  }
  const auto buckets = per_replica.front().rows();
  const auto n = per_replica.front().cols();
  for (const auto& m : per_replica) {
    if (m.rows() != buckets || m.cols() != n) throw Error(ErrorKind::Dimension, "ensemble shapes differ");
  }

  DriftReport r;
  r.replicas = replicas;
  r.buckets = static_cast<int>(buckets);
  r.components = static_cast<int>(n);
  r.z_band = options.z_band;
  r.pass_fraction_required = options.pass_fraction;
  r.mean.resize(buckets, n);
  r.se.resize(buckets, n);
  r.z.resize(buckets, n);

  int passing = 0;
  for (Eigen::Index b = 0; b < buckets; ++b) {
    for (Eigen::Index c = 0; c < n; ++c) {
      CompensatedSum s;
      for (const auto& m : per_replica) s.add(m(b, c));
      const double mean = s.value() / replicas;
      CompensatedSum ss;
      for (const auto& m : per_replica) ss.add((m(b, c) - mean) * (m(b, c) - mean));
      const double se = std::sqrt(ss.value() / (replicas - 1.0) / replicas);
      double z = 0.0;
      if (se > 0.0) {
        z = mean / se;
      } else if (mean != 0.0) {
        z = std::copysign(std::numeric_limits<double>::infinity(), mean);
      }
      r.mean(b, c) = mean;
      r.se(b, c) = se;
      r.z(b, c) = z;
      if (std::abs(z) < options.z_band) ++passing;
    }
  }
  r.max_abs_z = r.z.cwiseAbs().maxCoeff();
  r.pass_fraction = static_cast<double>(passing) / static_cast<double>(buckets * n);
  r.pass = r.pass_fraction >= options.pass_fraction;
  return r;
}

DriftReport drift_test(std::span<const AlgebraPath> ensemble, const DriftOptions& options) {
  if (static_cast<int>(ensemble.size()) < DriftOptions::kMinReplicas) {
    throw Error(ErrorKind::Power, "drift test needs at least " + std::to_string(DriftOptions::kMinReplicas) +
                                      " replicas, got " + std::to_string(ensemble.size()));
  }
  std::vector<PathMatrix> buckets;
  buckets.reserve(ensemble.size());
  for (const auto& p : ensemble) {
    require_same_group(ensemble.front().spec(), p.spec(), "drift_test");
    require_same_grid(ensemble.front().grid, p.grid, "drift_test");
    buckets.push_back(bucket_increments(p, options.buckets));
  }
  DriftReport r = drift_statistics(buckets, options);
  r.group = std::string(ensemble.front().spec().name());
  r.connection = "none";
  return r;
}

DriftReport martingale_verdict(std::span<const GroupPath> ensemble, const ConnectionFunction& alpha,
                               const DriftOptions& options) {
  return martingale_verdict(
      ensemble.size(), [&](std::size_t r) { return ensemble[r]; }, alpha, options, 1);
}

DriftReport martingale_verdict(std::size_t replicas, const std::function<GroupPath(std::size_t)>& make_replica,
                               const ConnectionFunction& alpha, const DriftOptions& options, int workers) {
  if (static_cast<int>(replicas) < DriftOptions::kMinReplicas) {
    throw Error(ErrorKind::Power, "drift test needs at least " + std::to_string(DriftOptions::kMinReplicas) +
                                      " replicas, got " + std::to_string(replicas));
  }
  std::vector<PathMatrix> buckets(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    const GroupPath x = make_replica(r);
    require_same_group(alpha.group(), x.spec(), "martingale_verdict");
    buckets[r] = bucket_increments(compensator(x, alpha), options.buckets);
  });
  DriftReport r = drift_statistics(buckets, options);
  r.group = std::string(alpha.group().name());
  r.connection = alpha.label();
  return r;
}

QvLinearityReport qv_linearity_check(const Ensemble<GroupPath>& ensemble, const MetricSpec& metric,
                                     double tolerance) {
  if (ensemble.paths.empty()) throw Error(ErrorKind::Usage, "empty ensemble");
  const GroupSpec& g = metric.group();
  const int n = g.algebra_dim();
  if (ensemble.driver_covariance) {
    const AlgMat expected = metric.gram().inverse();
    const AlgMat& cov = *ensemble.driver_covariance;
    if (cov.rows() != n || cov.cols() != n ||
        (cov - expected).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, expected.cwiseAbs().maxCoeff())) {
      throw Error(ErrorKind::Precondition, "driver covariance is not the inverse Gram matrix of the metric");
    }
  }
  QvLinearityReport report;
  report.tolerance = tolerance;
  for (const auto& x : ensemble.paths) {
    require_same_group(g, x.spec(), "qv_linearity_check");
    const Eigen::VectorXd q = quadratic_integral(metric.gram(), x);
    report.ratios.push_back(q[q.size() - 1] / (n * x.grid.horizon));
  }
  const double m = static_cast<double>(report.ratios.size());
  report.mean_ratio = std::accumulate(report.ratios.begin(), report.ratios.end(), 0.0) / m;
  double ss = 0.0;
  for (double v : report.ratios) ss += (v - report.mean_ratio) * (v - report.mean_ratio);
  report.se = m > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  report.pass = std::abs(report.mean_ratio - 1.0) < tolerance;
  return report;
}

}  // namespace stochlie
