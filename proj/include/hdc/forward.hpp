#pragma once

#include "hdc/graph.hpp"
#include "hdc/linalg.hpp"

#include <cstdint>
#include <vector>

namespace hdc {

/// Anchored linear iteration x(t+1) = P x(t) + B u(0). B is M x K,
/// P is M x M, and [B | P] must respect the graph's sparsity pattern.
class IterationSystem {
public:
  IterationSystem(Matrix b, Matrix p, NetworkGraph graph);

  const Matrix& b() const { return b_; }
  const Matrix& p() const { return p_; }
  const NetworkGraph& graph() const { return graph_; }
  double rho() const { return rho_; }
  bool convergent() const { return rho_ < 1.0; }

private:
  Matrix b_;
  Matrix p_;
  NetworkGraph graph_;
  double rho_;
};

/// Anchor states U (K x m) are constant across iterations; sensor
/// states X (M x m) update.
struct StateMatrix {
  Matrix u;
  Matrix x;
};

struct Trajectory {
  std::vector<Matrix> snapshots;       // thinned after 1e4 iterations
  std::vector<long> snapshot_steps;    // t value of each snapshot
  std::vector<double> error_norms;     // ||X(t) - X_inf||_inf for t = 0..iterations
  long iterations = 0;
};

/// Thrown by run() when the step budget is exhausted before the
/// successive-difference test passes; carries the partial trajectory.
class MaxItersExceeded : public std::runtime_error {
public:
  MaxItersExceeded(const std::string& msg, Trajectory partial)
      : std::runtime_error(msg), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

private:
  Trajectory partial_;
};

/// One iteration: x' = P x + B u, u' = u.
StateMatrix step(const IterationSystem& sys, const StateMatrix& s);

/// Iterates until ||X(t+1) - X(t)||_inf <= tol or max_iters. Requires a
/// convergent system (throws DivergentSystemError otherwise). When
/// ||P||_inf < 1 the final snapshot is within tol / (1 - ||P||_inf) of
/// the true limit.
Trajectory run(const IterationSystem& sys, const Matrix& u0, const Matrix& x0,
               double tol, long max_iters);

/// Least-squares slope of ln||E(t)|| over the second half of the
/// trajectory. Needs >= 10 recorded error norms; returns -infinity if
/// the tail error is exactly zero (already converged).
double decay_exponent(const Trajectory& traj);

struct ConsensusDimension {
  long subspace_dim;  // m * rank(B)
  long hdc_dim;       // rank(B), <= K
};

/// Dimension of the space of reachable limits. Requires K < M and
/// rho(P) < 1; the error names the violated hypothesis.
ConsensusDimension consensus_dimension(const IterationSystem& sys, long m);

/// Metropolis weights on the symmetrized sensor-only graph (K = 0):
/// P doubly stochastic, B empty, rho(P) = 1, iterates converge to the
/// mean of the initial states on connected graphs. The returned system
/// holds the symmetrized graph.
IterationSystem average_consensus_preset(const NetworkGraph& g);

/// Jacobi splitting for a_sys * x = rhs_coupling * u: P = I - D^{-1} a_sys,
/// B = D^{-1} rhs_coupling. Throws on zero diagonal, sparsity violation,
/// or rho(P) >= 1 (radius reported).
IterationSystem jacobi_preset(const Matrix& a_sys, const Matrix& rhs_coupling,
                              const NetworkGraph& g);

/// Single-anchor preset with equal-neighbor row-stochastic weights;
/// every sensor limit equals the anchor state. Throws if some sensor is
/// unreachable from the anchor (detected as rho(P) = 1).
IterationSystem leader_follower_preset(const NetworkGraph& g);

/// Same, with caller-supplied row-stochastic weights F = [B | P].
IterationSystem leader_follower_preset(const NetworkGraph& g, const Matrix& f);

/// Damped iteration x += alpha_t (P x + B u - x + noise), with
/// alpha_t = (t+1)^-gamma, 0.5 < gamma <= 1, and i.i.d. Gaussian noise
/// of the given standard deviation. Deterministic for a fixed seed.
Trajectory robust_run(const IterationSystem& sys, const Matrix& u0,
                      const Matrix& x0, double noise_std, double gamma,
                      long iters, std::uint64_t seed);

}  // namespace hdc
