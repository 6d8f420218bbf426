#include "stochlie/campbell.hpp"

#include <cmath>
#include <numeric>

namespace stochlie {

std::string_view to_string(AdRule rule) { return rule == AdRule::LeftPoint ? "left" : "midpoint"; }

AdRule parse_ad_rule(std::string_view text) {
  if (text == "left" || text == "ito") return AdRule::LeftPoint;
  if (text == "midpoint" || text == "mid") return AdRule::Midpoint;
  throw Error(ErrorKind::Usage, "unknown Ad rule '" + std::string(text) + "' (expected left or midpoint)");
}

namespace {

/// Y at the quadrature node of step k, optionally inverted.
GroupMat node(const GroupPath& y, const PathMatrix& y_increments, int k, AdRule rule) {
  const GroupMat& yk = y.values[static_cast<std::size_t>(k)];
  if (rule == AdRule::LeftPoint) return yk;
  const AlgVec half = 0.5 * y_increments.row(k).transpose();
  return yk * mat_exp(y.spec().matrix_of(half));
}

PathMatrix ad_increments(const GroupPath& y, const PathMatrix& increments, AdRule rule, bool inverse) {
  const GroupSpec& g = y.spec();
  PathMatrix y_inc;
  if (rule == AdRule::Midpoint) y_inc = mc_increments(y);
  PathMatrix out(increments.rows(), increments.cols());
  for (int k = 0; k < increments.rows(); ++k) {
    GroupMat ystar = node(y, y_inc, k, rule);
    if (inverse) ystar = ystar.inverse().eval();
    out.row(k) = adjoint_coords(g, ystar, increments.row(k).transpose()).transpose();
  }
  return out;
}

void check_hypotheses(const ConnectionFunction& alpha, const NullQvResult& qv, const HypothesisOptions& h,
                      const char* op) {
  if (!h.enforce) return;
  if (!alpha.kills_diagonal()) {
    throw Error(ErrorKind::Precondition, std::string(op) + ": hypothesis alpha(A,A) = 0 fails for '" +
                                             alpha.label() + "'");
  }
  if (!qv.null_qv) {
    throw Error(ErrorKind::Precondition, std::string(op) + ": null quadratic variation hypothesis fails (max |z| " +
                                             std::to_string(qv.max_abs_z) + " > " + std::to_string(qv.critical) + ")");
  }
}

}  // namespace

AlgebraPath ad_integral(const GroupPath& y, const AlgebraPath& m, AdRule rule) {
  require_same_group(y.spec(), m.spec(), "ad_integral");
  require_same_grid(y.grid, m.grid, "ad_integral");
  return AlgebraPath::from_increments(m.spec(), m.grid, ad_increments(y, m.increments(), rule, false));
}

Eigen::VectorXd ch_residual(const AlgebraPath& m, const AlgebraPath& n, const ConnectionFunction& alpha, AdRule rule,
                            const HypothesisOptions& hypotheses) {
  require_same_group(m.spec(), n.spec(), "ch_residual");
  require_same_group(m.spec(), alpha.group(), "ch_residual");
  require_same_grid(m.grid, n.grid, "ch_residual");
  if (hypotheses.enforce) check_hypotheses(alpha, null_qv_check(m, n, hypotheses.significance), hypotheses, "ch_residual");

  const GroupPath lhs = ito_exponential(m + n, alpha);
  const GroupPath y = ito_exponential(n, alpha);
  const GroupPath z = ito_exponential(ad_integral(y, m, rule), alpha);
  Eigen::VectorXd out(m.steps() + 1);
  for (int k = 0; k <= m.steps(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    out[k] = frobenius_dist(lhs.values[i], GroupMat(z.values[i] * y.values[i]));
  }
  return out;
}

Eigen::VectorXd log_product_residual(const GroupPath& x, const GroupPath& y, const ConnectionFunction& alpha,
                                     AdRule rule, const HypothesisOptions& hypotheses) {
  require_same_group(x.spec(), y.spec(), "log_product_residual");
  require_same_group(x.spec(), alpha.group(), "log_product_residual");
  require_same_grid(x.grid, y.grid, "log_product_residual");
  if (hypotheses.enforce) {
    check_hypotheses(alpha, null_qv_check(x, y, hypotheses.significance), hypotheses, "log_product_residual");
  }

  const AlgebraPath lhs = ito_logarithm(product_path(x, y), alpha);
  const AlgebraPath log_x = ito_logarithm(x, alpha);
  const AlgebraPath log_y = ito_logarithm(y, alpha);
  const AlgebraPath rhs =
      AlgebraPath::from_increments(x.spec(), x.grid, ad_increments(y, log_x.increments(), rule, true)) + log_y;
  Eigen::VectorXd out(x.steps() + 1);
  for (int k = 0; k <= x.steps(); ++k) out[k] = (lhs.values.row(k) - rhs.values.row(k)).norm();
  return out;
}

GroupPath product_path(const GroupPath& x, const GroupPath& y) {
  require_same_group(x.spec(), y.spec(), "product_path");
  require_same_grid(x.grid, y.grid, "product_path");
  std::vector<GroupMat> values;
  values.reserve(x.values.size());
  for (std::size_t k = 0; k < x.values.size(); ++k) values.push_back(x.values[k] * y.values[k]);
  return {x.spec(), x.grid, std::move(values)};
}

namespace {
bool monotone(const std::vector<LadderPoint>& ladder, double LadderPoint::*mean, double LadderPoint::*se) {
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    const double slack = std::hypot(ladder[i].*se, ladder[i - 1].*se);
    if (ladder[i].*mean > ladder[i - 1].*mean + slack) return false;
  }
  return true;
}

struct MeanStats {
  double mean = 0.0, se = 0.0, max = 0.0;
};

MeanStats stats(const std::vector<double>& v) {
  MeanStats s;
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) {
    ss += (x - s.mean) * (x - s.mean);
    s.max = std::max(s.max, x);
  }
  s.se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return s;
}
}  // namespace

bool CHReport::ch_monotone() const { return monotone(ladder, &LadderPoint::ch_mean, &LadderPoint::ch_se); }
bool CHReport::log_product_monotone() const {
  return monotone(ladder, &LadderPoint::log_product_mean, &LadderPoint::log_product_se);
}

CHReport run_ch_ladder(const CHConfig& config) {
  if (config.replicas < 1) throw Error(ErrorKind::Usage, "replicas must be positive");
  if (config.dts.empty()) throw Error(ErrorKind::Usage, "empty dt ladder");
  const GroupSpec& g = group(config.group);
  const ConnectionFunction alpha = alpha_biinvariant(g);
  const int n = g.algebra_dim();
  const AlgMat unit = AlgMat::Identity(n, n);

  CHReport report;
  report.group = config.group;
  report.connection = alpha.label();
  report.rule = config.rule;
  report.horizon = config.horizon;
  report.replicas = config.replicas;
  report.base_seed = config.base_seed;

  for (std::size_t level = 0; level < config.dts.size(); ++level) {
    const double dt = config.dts[level];
    if (!(dt > 0.0)) throw Error(ErrorKind::Usage, "dt must be positive");
    const int steps = static_cast<int>(std::lround(config.horizon / dt));
    const TimeGrid grid(config.horizon, std::max(1, steps));
    std::vector<double> ch(static_cast<std::size_t>(config.replicas));
    std::vector<double> lp(static_cast<std::size_t>(config.replicas));
    parallel_for(ch.size(), config.workers, [&](std::size_t r) {
      const std::uint64_t replica = (static_cast<std::uint64_t>(level) << 32) | r;
      const AlgebraPath m = brownian_driver(g, grid, derive_seed(config.base_seed, replica, 0), unit);
      const AlgebraPath nn = brownian_driver(g, grid, derive_seed(config.base_seed, replica, 1), unit);
      ch[r] = ch_residual(m, nn, alpha, config.rule)[grid.steps];
      const GroupPath x = ito_exponential(m, alpha);
      const GroupPath y = ito_exponential(nn, alpha);
      lp[r] = log_product_residual(x, y, alpha, config.rule)[grid.steps];
    });
    const MeanStats cs = stats(ch);
    const MeanStats ls = stats(lp);
    report.ladder.push_back({dt, grid.steps, cs.mean, cs.se, cs.max, ls.mean, ls.se, ls.max});
  }
  return report;
}

}  // namespace stochlie
