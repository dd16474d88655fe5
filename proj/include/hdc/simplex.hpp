#pragma once

#include "hdc/linalg.hpp"

#include <vector>

namespace hdc {

/// Linear program in computational standard form:
///   minimize    c' x
///   subject to  A x = b,  x >= 0.
struct LpProblem {
  Matrix a;  // m x n
  Vector b;  // m
  Vector c;  // n
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// Solution with an optimality certificate recomputed from the original
/// (A, b, c) data at the final basis: primal x, dual y, duality gap
/// |c'x - b'y|, worst primal violation and most negative reduced cost.
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double objective = 0.0;
  Vector y;
  double duality_gap = 0.0;
  double primal_violation = 0.0;  // max(||Ax-b||_inf, max(0, -min x))
  double min_reduced_cost = 0.0;  // >= -tol at a certified optimum
  std::vector<int> basis;         // column indices, one per active row
};

/// Dense two-phase primal simplex with Bland's rule (anti-cycling,
/// deterministic for a fixed column order). Intended for small dense
/// problems (tens of rows/columns).
LpSolution solve_lp(const LpProblem& lp);

}  // namespace hdc
