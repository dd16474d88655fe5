#include "hdc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hdc {
namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kReducedCostTol = 1e-9;

// Dense tableau: rows 0..m-1 are constraints, row m is the reduced-cost
// row (d_j = c_j - c_B' B^{-1} A_j), column n_cols is the rhs.
struct Tableau {
  int m = 0;
  int n_cols = 0;  // structural + artificial columns
  std::vector<double> t;
  std::vector<int> basis;      // basis[i] = column basic in row i
  std::vector<char> row_live;  // redundant rows get retired in phase 1

  double& at(int i, int j) { return t[static_cast<std::size_t>(i) * (n_cols + 1) + j]; }
  double at(int i, int j) const { return t[static_cast<std::size_t>(i) * (n_cols + 1) + j]; }
  double& rhs(int i) { return at(i, n_cols); }
};

void pivot(Tableau& tb, int row, int col) {
  const double inv = 1.0 / tb.at(row, col);
  for (int j = 0; j <= tb.n_cols; ++j) tb.at(row, j) *= inv;
  tb.at(row, col) = 1.0;
  for (int i = 0; i <= tb.m; ++i) {
    if (i == row) continue;
    const double factor = tb.at(i, col);
    if (factor == 0.0) continue;
    for (int j = 0; j <= tb.n_cols; ++j) {
      tb.at(i, j) -= factor * tb.at(row, j);
    }
    tb.at(i, col) = 0.0;
  }
  tb.basis[row] = col;
}

// Bland's rule: entering column = lowest index with negative reduced
// cost; leaving row = min ratio, ties by lowest basic variable index.
// Returns false when no entering column exists (optimal).
// Throws on unbounded rays via the out-parameter.
bool simplex_iterate(Tableau& tb, int allowed_cols, bool& unbounded) {
  unbounded = false;
  const long max_pivots = 50000L + 200L * (tb.m + tb.n_cols);
  for (long it = 0;; ++it) {
    if (it > max_pivots) {
      throw std::runtime_error("solve_lp: pivot limit exceeded");
    }
    int enter = -1;
    for (int j = 0; j < allowed_cols; ++j) {
      if (tb.at(tb.m, j) < -kReducedCostTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return true;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < tb.m; ++i) {
      if (!tb.row_live[i]) continue;
      const double a = tb.at(i, enter);
      if (a <= kPivotEps) continue;
      const double ratio = tb.rhs(i) / a;
      if (ratio < best_ratio - 1e-15 ||
          (std::abs(ratio - best_ratio) <= 1e-15 &&
           (leave < 0 || tb.basis[i] < tb.basis[leave]))) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave < 0) {
      unbounded = true;
      return false;
    }
    pivot(tb, leave, enter);
  }
}

void set_reduced_cost_row(Tableau& tb, const std::vector<double>& cost) {
  for (int j = 0; j <= tb.n_cols; ++j) tb.at(tb.m, j) = 0.0;
  for (int j = 0; j < static_cast<int>(cost.size()); ++j) {
    tb.at(tb.m, j) = cost[j];
  }
  for (int i = 0; i < tb.m; ++i) {
    if (!tb.row_live[i]) continue;
    const double cb = cost[tb.basis[i]];
    if (cb == 0.0) continue;
    for (int j = 0; j <= tb.n_cols; ++j) {
      tb.at(tb.m, j) -= cb * tb.at(i, j);
    }
  }
}

}  // namespace

LpSolution solve_lp(const LpProblem& lp) {
  const int m = static_cast<int>(lp.a.rows());
  const int n = static_cast<int>(lp.a.cols());
  if (lp.b.size() != m || lp.c.size() != n) {
    throw std::invalid_argument("solve_lp: inconsistent problem dimensions");
  }

  Tableau tb;
  tb.m = m;
  tb.n_cols = n + m;  // artificial column per row
  tb.t.assign(static_cast<std::size_t>(m + 1) * (tb.n_cols + 1), 0.0);
  tb.basis.resize(m);
  tb.row_live.assign(m, 1);

  for (int i = 0; i < m; ++i) {
    const double sign = lp.b(i) < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) tb.at(i, j) = sign * lp.a(i, j);
    tb.rhs(i) = sign * lp.b(i);
    tb.at(i, n + i) = 1.0;
    tb.basis[i] = n + i;
  }

  // Phase 1: minimize the artificial total.
  std::vector<double> phase1_cost(tb.n_cols, 0.0);
  for (int i = 0; i < m; ++i) phase1_cost[n + i] = 1.0;
  set_reduced_cost_row(tb, phase1_cost);
  bool unbounded = false;
  simplex_iterate(tb, tb.n_cols, unbounded);  // phase 1 is always bounded

  double artificial_total = 0.0;
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] >= n) artificial_total += tb.rhs(i);
  }
  const double feas_tol = 1e-8 * (1.0 + lp.b.cwiseAbs().maxCoeff());
  LpSolution sol;
  if (artificial_total > feas_tol) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }

  // Drive leftover artificials out; an all-zero structural row is
  // redundant and gets retired.
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] < n) continue;
    int col = -1;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tb.at(i, j)) > kPivotEps) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      pivot(tb, i, col);
    } else {
      tb.row_live[i] = 0;
    }
  }

  // Phase 2 on the structural columns only.
  std::vector<double> phase2_cost(tb.n_cols, 0.0);
  for (int j = 0; j < n; ++j) phase2_cost[j] = lp.c(j);
  set_reduced_cost_row(tb, phase2_cost);
  simplex_iterate(tb, n, unbounded);
  if (unbounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  // Certify from the original data: solve for the exact vertex of the
  // final basis and its dual, then measure feasibility and the gap.
  std::vector<int> active_rows;
  std::vector<int> basis_cols;
  for (int i = 0; i < m; ++i) {
    if (!tb.row_live[i]) continue;
    active_rows.push_back(i);
    basis_cols.push_back(tb.basis[i]);
  }
  const int mb = static_cast<int>(active_rows.size());
  Matrix ab(mb, mb);
  Vector bb(mb), cb(mb);
  for (int r = 0; r < mb; ++r) {
    bb(r) = lp.b(active_rows[r]);
    cb(r) = lp.c(basis_cols[r]);
    for (int cidx = 0; cidx < mb; ++cidx) {
      ab(r, cidx) = lp.a(active_rows[r], basis_cols[cidx]);
    }
  }
  Eigen::FullPivLU<Matrix> lu(ab);
  if (!lu.isInvertible()) {
    throw std::runtime_error("solve_lp: singular final basis");
  }
  const Vector xb = lu.solve(bb);
  const Vector y_active = lu.transpose().solve(cb);

  sol.status = LpStatus::Optimal;
  sol.x = Vector::Zero(n);
  for (int r = 0; r < mb; ++r) sol.x(basis_cols[r]) = xb(r);
  sol.y = Vector::Zero(m);
  for (int r = 0; r < mb; ++r) sol.y(active_rows[r]) = y_active(r);
  sol.objective = lp.c.dot(sol.x);
  sol.basis = basis_cols;

  const Vector resid = lp.a * sol.x - lp.b;
  const double neg = sol.x.size() > 0 ? std::max(0.0, -sol.x.minCoeff()) : 0.0;
  sol.primal_violation =
      std::max(resid.size() > 0 ? resid.cwiseAbs().maxCoeff() : 0.0, neg);
  const Vector reduced = lp.c - lp.a.transpose() * sol.y;
  sol.min_reduced_cost = reduced.size() > 0 ? reduced.minCoeff() : 0.0;
  sol.duality_gap = std::abs(sol.objective - lp.b.dot(sol.y));
  return sol;
}

}  // namespace hdc
