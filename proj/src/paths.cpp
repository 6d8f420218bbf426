#include "stochlie/paths.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include <Eigen/Cholesky>

namespace stochlie {

TimeGrid::TimeGrid(double horizon_, int steps_) : horizon(horizon_), steps(steps_) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorKind::Usage, "time horizon must be positive");
  if (steps < 1) throw Error(ErrorKind::Usage, "step count must be positive");
}

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* op) {
  if (!(a == b)) throw Error(ErrorKind::GridMismatch, std::string(op) + ": paths live on different time grids");
}

// ---------------------------------------------------------------------------
// AlgebraPath

AlgebraPath::AlgebraPath(const GroupSpec& g, TimeGrid grid_, PathMatrix v)
    : group(&g), grid(grid_), values(std::move(v)) {
  if (values.rows() != grid.steps + 1 || values.cols() != g.algebra_dim()) {
    throw Error(ErrorKind::Dimension, "algebra path must be (steps + 1) x algebra_dim");
  }
  if (!values.allFinite()) throw Error(ErrorKind::Range, "algebra path has non-finite entries");
}

AlgebraPath AlgebraPath::zero(const GroupSpec& g, TimeGrid grid_) {
  return {g, grid_, PathMatrix::Zero(grid_.steps + 1, g.algebra_dim())};
}

PathMatrix AlgebraPath::increments() const {
  return values.bottomRows(grid.steps) - values.topRows(grid.steps);
}

AlgebraPath AlgebraPath::from_increments(const GroupSpec& g, TimeGrid grid_, const PathMatrix& increments) {
  if (increments.rows() != grid_.steps || increments.cols() != g.algebra_dim()) {
    throw Error(ErrorKind::Dimension, "increment matrix must be steps x algebra_dim");
  }
  PathMatrix v(grid_.steps + 1, g.algebra_dim());
  v.row(0).setZero();
  for (int k = 0; k < grid_.steps; ++k) v.row(k + 1) = v.row(k) + increments.row(k);
  return {g, grid_, std::move(v)};
}

AlgebraPath operator+(const AlgebraPath& a, const AlgebraPath& b) {
  require_same_group(a.spec(), b.spec(), "path +");
  require_same_grid(a.grid, b.grid, "path +");
  return {a.spec(), a.grid, a.values + b.values};
}

AlgebraPath operator-(const AlgebraPath& a, const AlgebraPath& b) {
  require_same_group(a.spec(), b.spec(), "path -");
  require_same_grid(a.grid, b.grid, "path -");
  return {a.spec(), a.grid, a.values - b.values};
}

// ---------------------------------------------------------------------------
// GroupPath

GroupPath::GroupPath(const GroupSpec& g, TimeGrid grid_, std::vector<GroupMat> v)
    : group(&g), grid(grid_), values(std::move(v)) {
  if (static_cast<int>(values.size()) != grid.steps + 1) {
    throw Error(ErrorKind::Dimension, "group path must hold steps + 1 matrices");
  }
  for (const auto& m : values) {
    if (m.rows() != g.matrix_dim() || m.cols() != g.matrix_dim()) {
      throw Error(ErrorKind::Dimension, "group path matrix has the wrong size");
    }
  }
}

GroupPath GroupPath::constant(const GroupSpec& g, TimeGrid grid_, const GroupMat& value) {
  return {g, grid_, std::vector<GroupMat>(static_cast<std::size_t>(grid_.steps + 1), value)};
}

PathMatrix GroupPath::coordinates() const {
  const int d = spec().matrix_dim();
  PathMatrix out(grid.steps + 1, d * d);
  for (int k = 0; k <= grid.steps; ++k) {
    const GroupMat& m = values[static_cast<std::size_t>(k)];
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) out(k, r * d + c) = m(r, c);
    }
  }
  return out;
}

double GroupPath::max_membership_defect() const {
  double worst = 0.0;
  for (const auto& m : values) worst = std::max(worst, spec().membership_defect(m));
  return worst;
}

// ---------------------------------------------------------------------------
// Random numbers

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t replica, std::uint64_t stream) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ splitmix64(replica + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ splitmix64(stream + 0x85157af5ULL));
  return h;
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix64(key_ + counter * 0x9e3779b97f4a7c15ULL);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

void CounterRng::normals(std::uint64_t first, std::span<double> out) const {
  std::size_t i = 0;
  std::uint64_t c = first;
  while (i < out.size()) {
    const double r = std::sqrt(-2.0 * std::log(uniform(c)));
    const double theta = 2.0 * std::numbers::pi * uniform(c + 1);
    out[i++] = r * std::cos(theta);
    if (i < out.size()) out[i++] = r * std::sin(theta);
    c += 2;
  }
}

AlgMat cholesky_factor(const AlgMat& cov) {
  if (cov.rows() != cov.cols()) throw Error(ErrorKind::Dimension, "covariance must be square");
  if (!cov.allFinite() || (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cov.norm())) {
    throw Error(ErrorKind::Metric, "covariance is not symmetric");
  }
  Eigen::LLT<AlgMat> llt(cov);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::Metric, "covariance is not positive definite");
  AlgMat l = llt.matrixL();
  return l;
}

namespace {

AlgebraPath driven_path(const GroupSpec& g, const TimeGrid& grid, std::uint64_t seed, const AlgVec& drift,
                        const AlgMat& diffusion) {
  const int n = g.algebra_dim();
  if (drift.size() != n || diffusion.rows() != n || diffusion.cols() != n) {
    throw Error(ErrorKind::Dimension, "driver coefficients do not match the algebra dimension");
  }
  if (!drift.allFinite() || !diffusion.allFinite()) throw Error(ErrorKind::Range, "driver coefficients not finite");
  const CounterRng rng(seed);
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  PathMatrix v(grid.steps + 1, n);
  v.row(0).setZero();
  AlgVec z(n);
  for (int k = 0; k < grid.steps; ++k) {
    rng.normals(step_counter(k, n), std::span<double>(z.data(), static_cast<std::size_t>(n)));
    const AlgVec inc = drift * dt + diffusion * (sqrt_dt * z);
    v.row(k + 1) = v.row(k) + inc.transpose();
  }
  return {g, grid, std::move(v)};
}

}  // namespace

AlgebraPath brownian_driver(const GroupSpec& g, const TimeGrid& grid, std::uint64_t seed, const AlgMat& covariance) {
  if (covariance.rows() != g.algebra_dim() || covariance.cols() != g.algebra_dim()) {
    throw Error(ErrorKind::Dimension, "covariance does not match the algebra dimension");
  }
  return driven_path(g, grid, seed, AlgVec::Zero(g.algebra_dim()), cholesky_factor(covariance));
}

AlgebraPath drift_diffusion_driver(const GroupSpec& g, const TimeGrid& grid, std::uint64_t seed, const AlgVec& drift,
                                   const AlgMat& diffusion) {
  return driven_path(g, grid, seed, drift, diffusion);
}

// ---------------------------------------------------------------------------
// Quadratic covariation

namespace {
void require_same_rows(const PathMatrix& p, const PathMatrix& q) {
  if (p.rows() != q.rows() || p.rows() < 2) {
    throw Error(ErrorKind::GridMismatch, "covariation needs two paths on the same grid");
  }
}
}  // namespace

std::vector<Eigen::MatrixXd> quadratic_covariation(const PathMatrix& p, const PathMatrix& q) {
  require_same_rows(p, q);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(p.rows()));
  out.push_back(Eigen::MatrixXd::Zero(p.cols(), q.cols()));
  for (Eigen::Index k = 0; k + 1 < p.rows(); ++k) {
    const Eigen::VectorXd dp = (p.row(k + 1) - p.row(k)).transpose();
    const Eigen::VectorXd dq = (q.row(k + 1) - q.row(k)).transpose();
    out.push_back(out.back() + dp * dq.transpose());
  }
  return out;
}

std::vector<Eigen::MatrixXd> quadratic_covariation(const AlgebraPath& p, const AlgebraPath& q) {
  require_same_grid(p.grid, q.grid, "quadratic_covariation");
  return quadratic_covariation(p.values, q.values);
}

Eigen::MatrixXd terminal_covariation(const PathMatrix& p, const PathMatrix& q) {
  require_same_rows(p, q);
  const Eigen::Index s = p.rows() - 1;
  const PathMatrix dp = p.bottomRows(s) - p.topRows(s);
  const PathMatrix dq = q.bottomRows(s) - q.topRows(s);
  return dp.transpose() * dq;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::Range, "normal quantile needs 0 < p < 1");
  // Bisection on the complementary error function, then two Newton steps.
  double lo = -40.0, hi = 40.0;
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 2; ++i) {
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (pdf > 0.0) x -= (cdf(x) - p) / pdf;
  }
  return x;
}

NullQvResult null_qv_check(const PathMatrix& p, const PathMatrix& q, double significance) {
  require_same_rows(p, q);
  if (!(significance > 0.0 && significance < 1.0)) throw Error(ErrorKind::Usage, "significance must lie in (0, 1)");
  const Eigen::Index s = p.rows() - 1;
  const PathMatrix dp = p.bottomRows(s) - p.topRows(s);
  const PathMatrix dq = q.bottomRows(s) - q.topRows(s);

  NullQvResult r;
  r.terminal = dp.transpose() * dq;
  r.scale = (dp.array().square().matrix().transpose() * dq.array().square().matrix()).cwiseSqrt();
  r.z = Eigen::MatrixXd::Zero(r.terminal.rows(), r.terminal.cols());
  for (Eigen::Index i = 0; i < r.terminal.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.terminal.cols(); ++j) {
      if (r.scale(i, j) > 0.0) {
        r.z(i, j) = r.terminal(i, j) / r.scale(i, j);
        ++r.tested_entries;
      } else if (r.terminal(i, j) != 0.0) {
        r.z(i, j) = std::numeric_limits<double>::infinity();
      }
    }
  }
  r.max_abs_z = r.z.cwiseAbs().maxCoeff();
  const double tail = (1.0 - significance) / (2.0 * std::max(1, r.tested_entries));
  r.critical = normal_quantile(1.0 - tail);
  r.null_qv = r.max_abs_z <= r.critical;
  return r;
}

NullQvResult null_qv_check(const AlgebraPath& p, const AlgebraPath& q, double significance) {
  require_same_grid(p.grid, q.grid, "null_qv_check");
  return null_qv_check(p.values, q.values, significance);
}

NullQvResult null_qv_check(const GroupPath& p, const GroupPath& q, double significance) {
  require_same_grid(p.grid, q.grid, "null_qv_check");
  return null_qv_check(p.coordinates(), q.coordinates(), significance);
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) guarded(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace stochlie
