#include "hdc/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace hdc {
namespace {

constexpr long kThinThreshold = 10000;  // keep every snapshot up to here
constexpr long kThinStride = 10;

Matrix concat_bp(const Matrix& b, const Matrix& p) {
  Matrix f(p.rows(), b.cols() + p.cols());
  if (b.cols() > 0) f.leftCols(b.cols()) = b;
  f.rightCols(p.cols()) = p;
  return f;
}

void check_state_dims(const IterationSystem& sys, const Matrix& u,
                      const Matrix& x) {
  if (u.rows() != sys.b().cols()) {
    throw std::invalid_argument("state: U must have K rows");
  }
  if (x.rows() != sys.p().rows()) {
    throw std::invalid_argument("state: X must have M rows");
  }
  if (sys.b().cols() > 0 && u.cols() != x.cols()) {
    throw std::invalid_argument("state: U and X must have equal width");
  }
}

void record(Trajectory& traj, const Matrix& x, long t) {
  if (t <= kThinThreshold || t % kThinStride == 0) {
    traj.snapshots.push_back(x);
    traj.snapshot_steps.push_back(t);
  }
}

Matrix limit_of(const IterationSystem& sys, const Matrix& u0,
                const Matrix& x0) {
  if (sys.b().cols() == 0) return Matrix::Zero(x0.rows(), x0.cols());
  return limit_map(sys.p(), sys.b()) * u0;
}

}  // namespace

IterationSystem::IterationSystem(Matrix b, Matrix p, NetworkGraph graph)
    : b_(std::move(b)), p_(std::move(p)), graph_(std::move(graph)) {
  if (p_.rows() != p_.cols()) {
    throw std::invalid_argument("IterationSystem: P must be square");
  }
  if (p_.rows() != graph_.n_sensors() || b_.rows() != graph_.n_sensors() ||
      b_.cols() != graph_.n_anchors()) {
    throw std::invalid_argument(
        "IterationSystem: B/P dimensions do not match the graph");
  }
  require_finite(b_, "B");
  require_finite(p_, "P");
  if (!respects_sparsity(concat_bp(b_, p_), graph_)) {
    throw std::invalid_argument(
        "IterationSystem: [B | P] violates the graph sparsity pattern");
  }
  rho_ = spectral_radius(p_);
}

StateMatrix step(const IterationSystem& sys, const StateMatrix& s) {
  check_state_dims(sys, s.u, s.x);
  StateMatrix out;
  out.u = s.u;
  out.x = sys.p() * s.x;
  if (sys.b().cols() > 0) out.x += sys.b() * s.u;
  return out;
}

Trajectory run(const IterationSystem& sys, const Matrix& u0, const Matrix& x0,
               double tol, long max_iters) {
  if (tol <= 0.0) throw std::invalid_argument("run: tol must be positive");
  check_state_dims(sys, u0, x0);
  if (!sys.convergent()) {
    throw DivergentSystemError(
        "run: divergent system, spectral radius " + std::to_string(sys.rho()) +
            " >= 1",
        sys.rho());
  }
  const Matrix x_inf = limit_of(sys, u0, x0);

  Trajectory traj;
  Matrix x = x0;
  record(traj, x, 0);
  traj.error_norms.push_back(induced_norm(x - x_inf, NormKind::Infinity));
  for (long t = 0; t < max_iters; ++t) {
    Matrix x_next = sys.p() * x;
    if (sys.b().cols() > 0) x_next += sys.b() * u0;
    const double diff = induced_norm(x_next - x, NormKind::Infinity);
    x.swap(x_next);
    traj.iterations = t + 1;
    record(traj, x, t + 1);
    traj.error_norms.push_back(induced_norm(x - x_inf, NormKind::Infinity));
    if (diff <= tol) return traj;
  }
  throw MaxItersExceeded("run: max_iters (" + std::to_string(max_iters) +
                             ") exceeded before reaching tol",
                         std::move(traj));
}

double decay_exponent(const Trajectory& traj) {
  const auto& e = traj.error_norms;
  if (e.size() < 10) {
    throw std::invalid_argument(
        "decay_exponent: trajectory too short (< 10 error norms)");
  }
  const std::size_t begin = e.size() / 2;
  for (std::size_t t = begin; t < e.size(); ++t) {
    if (e[t] <= 0.0) return -std::numeric_limits<double>::infinity();
  }
  // Least-squares slope of ln e(t) against t over the tail.
  const std::size_t n = e.size() - begin;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t t = begin; t < e.size(); ++t) {
    const double ti = static_cast<double>(t);
    const double yi = std::log(e[t]);
    st += ti;
    sy += yi;
    stt += ti * ti;
    sty += ti * yi;
  }
  const double denom = n * stt - st * st;
  return (n * sty - st * sy) / denom;
}

ConsensusDimension consensus_dimension(const IterationSystem& sys, long m) {
  const long k = sys.b().cols();
  const long sensors = sys.p().rows();
  if (!(k < sensors)) {
    throw std::invalid_argument(
        "consensus_dimension: hypothesis K < M violated");
  }
  if (!sys.convergent()) {
    throw std::invalid_argument(
        "consensus_dimension: hypothesis rho(P) < 1 violated");
  }
  const long rank_b = numerical_rank(sys.b());
  return {m * rank_b, rank_b};
}

IterationSystem average_consensus_preset(const NetworkGraph& g) {
  if (g.n_anchors() != 0) {
    throw std::invalid_argument(
        "average_consensus_preset: graph must be sensor-only (K = 0)");
  }
  const int m = g.n_sensors();
  // Metropolis weights need a symmetric neighbor relation; symmetrize
  // the adjacency and attach the symmetrized graph to the system.
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (g.adjacency(i, j) || g.adjacency(j, i)) edges.emplace_back(i, j);
    }
  }
  NetworkGraph sym(m, 0, edges);

  std::vector<int> degree(m, 0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (j != i && sym.adjacency(i, j)) ++degree[i];
    }
  }
  Matrix p = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    double off = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j == i || !sym.adjacency(i, j)) continue;
      p(i, j) = 1.0 / (1.0 + std::max(degree[i], degree[j]));
      off += p(i, j);
    }
    p(i, i) = 1.0 - off;
  }
  return IterationSystem(Matrix::Zero(m, 0), std::move(p), std::move(sym));
}

IterationSystem jacobi_preset(const Matrix& a_sys, const Matrix& rhs_coupling,
                              const NetworkGraph& g) {
  if (a_sys.rows() != a_sys.cols()) {
    throw std::invalid_argument("jacobi_preset: system matrix must be square");
  }
  const auto m = a_sys.rows();
  if (rhs_coupling.rows() != m) {
    throw std::invalid_argument(
        "jacobi_preset: coupling matrix row count must match the system");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (a_sys(i, i) == 0.0) {
      throw std::invalid_argument("jacobi_preset: zero diagonal at row " +
                                  std::to_string(i));
    }
  }
  const Vector dinv = a_sys.diagonal().cwiseInverse();
  Matrix p = Matrix::Identity(m, m) - dinv.asDiagonal() * a_sys;
  Matrix b = dinv.asDiagonal() * rhs_coupling;
  const double rho = spectral_radius(p);
  if (rho >= 1.0) {
    throw DivergentSystemError(
        "jacobi_preset: Jacobi iteration diverges, spectral radius " +
            std::to_string(rho),
        rho);
  }
  return IterationSystem(std::move(b), std::move(p), g);
}

IterationSystem leader_follower_preset(const NetworkGraph& g) {
  if (g.n_anchors() != 1) {
    throw std::invalid_argument(
        "leader_follower_preset: exactly one anchor required");
  }
  const int m = g.n_sensors();
  const int n = g.n_total();
  Matrix f = Matrix::Zero(m, n);
  for (int i = 0; i < m; ++i) {
    int deg = 0;
    for (int j = 0; j < n; ++j) deg += g.adjacency(1 + i, j);
    for (int j = 0; j < n; ++j) {
      if (g.adjacency(1 + i, j)) f(i, j) = 1.0 / deg;
    }
  }
  return leader_follower_preset(g, f);
}

IterationSystem leader_follower_preset(const NetworkGraph& g,
                                       const Matrix& f) {
  if (g.n_anchors() != 1) {
    throw std::invalid_argument(
        "leader_follower_preset: exactly one anchor required");
  }
  const int m = g.n_sensors();
  if (f.rows() != m || f.cols() != g.n_total()) {
    throw std::invalid_argument("leader_follower_preset: F must be M x N");
  }
  for (int i = 0; i < m; ++i) {
    if (std::abs(f.row(i).sum() - 1.0) > 1e-12 || f.row(i).minCoeff() < 0.0) {
      throw std::invalid_argument(
          "leader_follower_preset: row " + std::to_string(i) +
          " of F is not stochastic");
    }
  }
  IterationSystem sys(f.leftCols(1), f.rightCols(m), g);
  if (!sys.convergent()) {
    throw DivergentSystemError(
        "leader_follower_preset: some sensor is unreachable from the anchor "
        "(spectral radius " +
            std::to_string(sys.rho()) + ")",
        sys.rho());
  }
  return sys;
}

Trajectory robust_run(const IterationSystem& sys, const Matrix& u0,
                      const Matrix& x0, double noise_std, double gamma,
                      long iters, std::uint64_t seed) {
  if (!(gamma > 0.5 && gamma <= 1.0)) {
    throw std::invalid_argument("robust_run: gamma must be in (0.5, 1]");
  }
  if (noise_std < 0.0) {
    throw std::invalid_argument("robust_run: noise_std must be nonnegative");
  }
  check_state_dims(sys, u0, x0);
  if (!sys.convergent()) {
    throw DivergentSystemError("robust_run: divergent system", sys.rho());
  }
  const Matrix x_inf = limit_of(sys, u0, x0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Trajectory traj;
  Matrix x = x0;
  record(traj, x, 0);
  traj.error_norms.push_back(induced_norm(x - x_inf, NormKind::Infinity));
  for (long t = 0; t < iters; ++t) {
    Matrix residual = sys.p() * x - x;
    if (sys.b().cols() > 0) residual += sys.b() * u0;
    if (noise_std > 0.0) {
      for (Eigen::Index r = 0; r < residual.rows(); ++r) {
        for (Eigen::Index c = 0; c < residual.cols(); ++c) {
          residual(r, c) += noise_std * gauss(rng);
        }
      }
    }
    const double alpha = std::pow(static_cast<double>(t + 1), -gamma);
    x += alpha * residual;
    traj.iterations = t + 1;
    record(traj, x, t + 1);
    traj.error_norms.push_back(induced_norm(x - x_inf, NormKind::Infinity));
  }
  return traj;
}

}  // namespace hdc
