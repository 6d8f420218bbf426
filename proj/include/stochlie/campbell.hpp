#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stochlie/explog.hpp"

namespace stochlie {

/// Quadrature rule for the adjoint integral sum Ad(Y_*) dM_k.
enum class AdRule {
  /// Y_* = Y_k
  LeftPoint,
  /// Y_* = Y_k exp(dL_k / 2), the geometric midpoint of the step
  Midpoint,
};

std::string_view to_string(AdRule rule);
AdRule parse_ad_rule(std::string_view text);

struct HypothesisOptions {
  /// Disable to run the identities outside their hypotheses (negative controls).
  bool enforce = true;
  /// Family-wise confidence of the null quadratic variation test. Deliberately
  /// lenient: it is a sanity gate on the inputs, not the experiment.
  double significance = 1.0 - 1e-6;
};

/// cumulative sum of Ad(Y_*) dM_k
AlgebraPath ad_integral(const GroupPath& y, const AlgebraPath& m, AdRule rule = AdRule::Midpoint);

/// Per-grid-point Frobenius distance between e(M + N) and
/// e(int Ad(e(N)) dM) e(N), both sides driven by the same increments.
Eigen::VectorXd ch_residual(const AlgebraPath& m, const AlgebraPath& n, const ConnectionFunction& alpha,
                            AdRule rule = AdRule::Midpoint, const HypothesisOptions& hypotheses = {});

/// Per-grid-point coordinate distance between log(X Y) and
/// int Ad(Y_*^-1) d log(X) + log(Y).
Eigen::VectorXd log_product_residual(const GroupPath& x, const GroupPath& y, const ConnectionFunction& alpha,
                                     AdRule rule = AdRule::Midpoint, const HypothesisOptions& hypotheses = {});

/// Pointwise product X_k Y_k.
GroupPath product_path(const GroupPath& x, const GroupPath& y);

struct LadderPoint {
  double dt = 0.0;
  int steps = 0;
  double ch_mean = 0.0;
  double ch_se = 0.0;
  double ch_max = 0.0;
  double log_product_mean = 0.0;
  double log_product_se = 0.0;
  double log_product_max = 0.0;
};

struct CHReport {
  GroupId group = GroupId::SO3;
  std::string connection;
  AdRule rule = AdRule::Midpoint;
  double horizon = 1.0;
  int replicas = 0;
  std::uint64_t base_seed = 0;
  std::vector<LadderPoint> ladder;

  /// Mean residuals decrease along the ladder, allowing a rise of at most one
  /// combined standard error between neighbours.
  bool ch_monotone() const;
  bool log_product_monotone() const;
};

struct CHConfig {
  GroupId group = GroupId::SO3;
  std::vector<double> dts{4e-3, 2e-3, 1e-3};
  double horizon = 1.0;
  int replicas = 256;
  std::uint64_t base_seed = 0;
  AdRule rule = AdRule::Midpoint;
  int workers = 1;
};

/// Runs both identities for independent unit Brownian drivers M and N
/// (streams 0 and 1 of each replica) with the bi-invariant connection.
CHReport run_ch_ladder(const CHConfig& config);

}  // namespace stochlie
