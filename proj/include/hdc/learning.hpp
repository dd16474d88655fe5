#pragma once

#include "hdc/graph.hpp"
#include "hdc/linalg.hpp"
#include "hdc/simplex.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace hdc {

/// 64 uniform budget values on [0, 0.99].
std::vector<double> default_eps_grid();

/// Inverse-design instance: pick (B, P) respecting the graph so the
/// iteration limit (I-P)^{-1} B approximates the M x K target W.
/// Uses the infinity-induced norm throughout, which decomposes both
/// objectives row-wise into l1-constrained l1 regressions.
struct LearningSpec {
  NetworkGraph graph;
  Matrix w;
  std::vector<double> eps_grid;

  /// Validates dimensions, finiteness, and the grid (strictly
  /// increasing, all < 1); an empty grid is replaced by the default.
  LearningSpec(NetworkGraph g, Matrix target, std::vector<double> grid = {});

  int n_anchors() const { return graph.n_anchors(); }
  int n_sensors() const { return graph.n_sensors(); }
};

/// One row of the design problem: minimize ||b_i + p_i W - w_i||_1
/// subject to ||p_i||_1 <= eps and the row's sparsity pattern.
struct RowSolution {
  RowVector b;      // 1 x K, zeros at forbidden anchors
  RowVector p;      // 1 x M, zeros at forbidden sensors
  double residual;  // l1 residual at the optimum
  double duality_gap;
};

RowSolution solve_row(const LearningSpec& spec, int row, double eps);

/// A certified point of the residual-vs-budget curve with its design.
struct ParetoPoint {
  double eps;      // requested budget; equals ||P||_inf on [0, eps_exact]
  double delta;    // ||B + PW - W||_inf
  double utility;  // delta / (1 - eps)
  Matrix b;
  Matrix p;
  double p_norm;  // measured ||P||_inf
  double rho;     // rho(P), never exceeds p_norm
  bool beyond_exact = false;
};

/// Budget-constrained residual minimization, assembled row by row.
ParetoPoint solve_p1(const LearningSpec& spec, double eps);

double utility(const ParetoPoint& pt);

/// Smallest ||P||_inf admitting an exact design (I-P)^{-1} B = W, or
/// +infinity when none exists with norm < 1. Carries the minimizing
/// design when finite.
struct ExactDesign {
  double eps_exact;
  std::optional<std::pair<Matrix, Matrix>> solution;  // (B, P)
};

ExactDesign solve_exact(const LearningSpec& spec);

/// rank(B) == rank(W) at relative tolerance tol: necessary for B to be
/// part of an exact design.
bool rank_condition_holds(const Matrix& b, const Matrix& w,
                          double tol = 1e-10);

struct ParetoFront {
  std::vector<ParetoPoint> points;  // eps-ascending, all within [0, eps_exact]
  double eps_exact;                 // +infinity when no exact design exists
  double c_inf;                     // infimum achievable utility
  LearningSpec spec;                // kept for re-solves at off-grid budgets
};

/// Solves the budget problem across the grid (clipped to [0, eps_exact],
/// with eps_exact appended when finite). When no exact design exists the
/// grid is refined near 1 (0.99, 0.999) and c_inf is estimated as
/// delta(eps_max) / (1 - eps_max); otherwise c_inf = 0.
ParetoFront build_pareto_front(const LearningSpec& spec);

/// Checks that direct minimization of the utility over budgets <= eps
/// lands on the curve point at eps (within tol in both coordinates).
bool verify_front_optimality(const LearningSpec& spec, double eps,
                             int scan_points = 41, double tol = 1e-6);

class UnachievableCostError : public std::runtime_error {
public:
  UnachievableCostError(const std::string& msg, double c_inf)
      : std::runtime_error(msg), c_inf_(c_inf) {}
  double c_inf() const { return c_inf_; }

private:
  double c_inf_;
};

/// Operating point chosen by a tradeoff query, with the cost-line data:
/// the line through (eps, delta(eps)) and (1, 0) has slope -u and
/// intercept u, u = operating utility.
struct TradeoffResult {
  double operating_eps;
  double operating_cost;  // u*(eps) = e_ss bound
  Matrix b;
  Matrix p;
  double e_ss_bound;
  double e_ss_actual;  // ||(I-P)^{-1} B - W||_inf
  double line_slope;
  double line_intercept;
};

/// Fastest design meeting a cost cap: smallest front eps with
/// u*(eps) <= cost_cap. Throws UnachievableCostError (carrying c_inf)
/// when no front point meets the cap.
TradeoffResult tradeoff_fixed_cost(const ParetoFront& front, double cost_cap);

/// Cheapest design at speed budget eps_a: operates at
/// min(eps_a, eps_exact), re-solving off-grid budgets as needed.
TradeoffResult tradeoff_fixed_speed(const ParetoFront& front, double eps_a);

}  // namespace hdc
