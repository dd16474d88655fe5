#include "hdc/learning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace hdc {
namespace {

constexpr double kGapTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct RowVars {
  std::vector<int> b_cols;  // allowed anchor indices, ascending
  std::vector<int> p_cols;  // allowed sensor offsets (0-based in P), ascending
};

RowVars row_vars(const NetworkGraph& g, int row) {
  const int k = g.n_anchors();
  RowVars rv;
  const auto nb = g.neighborhoods(k + row);
  rv.b_cols = nb.anchors;
  rv.p_cols.reserve(nb.sensors.size());
  for (int s : nb.sensors) rv.p_cols.push_back(s - k);
  return rv;
}

// Column layout for the budgeted row LP (all variables >= 0):
//   [b+ | b- | p+ | p- | r_0..r_{K-1} | t1_0..t1_{K-1} | t2_... | s]
// Rows: residual bounds (b_i + p_i W - w_i)_k <= r_k and >= -r_k as
// equalities with slacks t1/t2, then the budget row sum(p+ + p-) + s = eps.
LpProblem build_p1_row(const Matrix& w, const RowVector& w_row,
                       const RowVars& rv, double eps) {
  const int k = static_cast<int>(w.cols());
  const int nb = static_cast<int>(rv.b_cols.size());
  const int np = static_cast<int>(rv.p_cols.size());
  const int n = 2 * nb + 2 * np + k + 2 * k + 1;
  const int m = 2 * k + 1;

  LpProblem lp;
  lp.a = Matrix::Zero(m, n);
  lp.b = Vector::Zero(m);
  lp.c = Vector::Zero(n);

  const int bp = 0, bm = nb, pp = 2 * nb, pm = 2 * nb + np;
  const int r0 = 2 * nb + 2 * np;
  const int t1 = r0 + k, t2 = t1 + k, slack = t2 + k;

  for (int c = 0; c < k; ++c) {
    const int up = c, lo = k + c;
    for (int a = 0; a < nb; ++a) {
      if (rv.b_cols[a] == c) {
        lp.a(up, bp + a) = 1.0;
        lp.a(up, bm + a) = -1.0;
        lp.a(lo, bp + a) = -1.0;
        lp.a(lo, bm + a) = 1.0;
      }
    }
    for (int j = 0; j < np; ++j) {
      const double wjc = w(rv.p_cols[j], c);
      lp.a(up, pp + j) = wjc;
      lp.a(up, pm + j) = -wjc;
      lp.a(lo, pp + j) = -wjc;
      lp.a(lo, pm + j) = wjc;
    }
    lp.a(up, r0 + c) = -1.0;
    lp.a(lo, r0 + c) = -1.0;
    lp.a(up, t1 + c) = 1.0;
    lp.a(lo, t2 + c) = 1.0;
    lp.b(up) = w_row(c);
    lp.b(lo) = -w_row(c);
    lp.c(r0 + c) = 1.0;
  }
  for (int j = 0; j < np; ++j) {
    lp.a(2 * k, pp + j) = 1.0;
    lp.a(2 * k, pm + j) = 1.0;
  }
  lp.a(2 * k, slack) = 1.0;
  lp.b(2 * k) = eps;
  return lp;
}

// Exact row LP: minimize sum(p+ + p-) subject to b_i + p_i W = w_i.
LpProblem build_p2_row(const Matrix& w, const RowVector& w_row,
                       const RowVars& rv) {
  const int k = static_cast<int>(w.cols());
  const int nb = static_cast<int>(rv.b_cols.size());
  const int np = static_cast<int>(rv.p_cols.size());
  const int n = 2 * nb + 2 * np;

  LpProblem lp;
  lp.a = Matrix::Zero(k, n);
  lp.b = Vector::Zero(k);
  lp.c = Vector::Zero(n);

  const int bp = 0, bm = nb, pp = 2 * nb, pm = 2 * nb + np;
  for (int c = 0; c < k; ++c) {
    for (int a = 0; a < nb; ++a) {
      if (rv.b_cols[a] == c) {
        lp.a(c, bp + a) = 1.0;
        lp.a(c, bm + a) = -1.0;
      }
    }
    for (int j = 0; j < np; ++j) {
      const double wjc = w(rv.p_cols[j], c);
      lp.a(c, pp + j) = wjc;
      lp.a(c, pm + j) = -wjc;
    }
    lp.b(c) = w_row(c);
  }
  for (int j = 0; j < np; ++j) {
    lp.c(pp + j) = 1.0;
    lp.c(pm + j) = 1.0;
  }
  return lp;
}

void decode_row(const Vector& x, const RowVars& rv, int k, int m,
                RowVector& b_out, RowVector& p_out) {
  const int nb = static_cast<int>(rv.b_cols.size());
  const int np = static_cast<int>(rv.p_cols.size());
  b_out = RowVector::Zero(k);
  p_out = RowVector::Zero(m);
  for (int a = 0; a < nb; ++a) {
    b_out(rv.b_cols[a]) = x(a) - x(nb + a);
  }
  for (int j = 0; j < np; ++j) {
    p_out(rv.p_cols[j]) = x(2 * nb + j) - x(2 * nb + np + j);
  }
}

ParetoPoint make_point(const LearningSpec& spec, double eps, Matrix b,
                       Matrix p) {
  ParetoPoint pt;
  pt.eps = eps;
  pt.b = std::move(b);
  pt.p = std::move(p);
  pt.delta = induced_norm(pt.b + pt.p * spec.w - spec.w, NormKind::Infinity);
  pt.utility = pt.delta / (1.0 - eps);
  pt.p_norm = induced_norm(pt.p, NormKind::Infinity);
  pt.rho = spectral_radius(pt.p);
  return pt;
}

TradeoffResult make_tradeoff(const LearningSpec& spec, const ParetoPoint& pt) {
  TradeoffResult res;
  res.operating_eps = pt.eps;
  res.operating_cost = pt.utility;
  res.b = pt.b;
  res.p = pt.p;
  res.e_ss_bound = pt.utility;
  res.e_ss_actual = induced_norm(limit_map(pt.p, pt.b) - spec.w,
                                 NormKind::Infinity);
  res.line_slope = -pt.utility;
  res.line_intercept = pt.utility;
  return res;
}

}  // namespace

std::vector<double> default_eps_grid() {
  std::vector<double> grid(64);
  for (int i = 0; i < 64; ++i) grid[i] = 0.99 * i / 63.0;
  return grid;
}

LearningSpec::LearningSpec(NetworkGraph g, Matrix target,
                           std::vector<double> grid)
    : graph(std::move(g)), w(std::move(target)), eps_grid(std::move(grid)) {
  if (graph.n_anchors() < 1) {
    throw std::invalid_argument("LearningSpec: at least one anchor required");
  }
  if (w.rows() != graph.n_sensors() || w.cols() != graph.n_anchors()) {
    throw std::invalid_argument("LearningSpec: W must be M x K");
  }
  require_finite(w, "W");
  if (eps_grid.empty()) eps_grid = default_eps_grid();
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (eps_grid[i] < 0.0 || eps_grid[i] >= 1.0) {
      throw std::invalid_argument("LearningSpec: grid values must be in [0, 1)");
    }
    if (i > 0 && eps_grid[i] <= eps_grid[i - 1]) {
      throw std::invalid_argument(
          "LearningSpec: grid must be strictly increasing");
    }
  }
}

RowSolution solve_row(const LearningSpec& spec, int row, double eps) {
  if (row < 0 || row >= spec.n_sensors()) {
    throw std::out_of_range("solve_row: row out of range");
  }
  if (eps < 0.0 || eps >= 1.0) {
    throw std::invalid_argument("solve_row: eps must be in [0, 1)");
  }
  const RowVars rv = row_vars(spec.graph, row);
  const RowVector w_row = spec.w.row(row);
  const LpProblem lp = build_p1_row(spec.w, w_row, rv, eps);
  const LpSolution sol = solve_lp(lp);
  // (b, p) = (0, 0) is always feasible, so anything else is a solver bug.
  if (sol.status != LpStatus::Optimal) {
    throw std::runtime_error("solve_row: LP reported " +
                             std::string(sol.status == LpStatus::Infeasible
                                             ? "infeasible"
                                             : "unbounded") +
                             " on a problem with a trivial feasible point");
  }
  if (sol.duality_gap > kGapTol) {
    throw std::runtime_error("solve_row: duality gap " +
                             std::to_string(sol.duality_gap) +
                             " exceeds certification tolerance");
  }
  RowSolution out;
  decode_row(sol.x, rv, spec.n_anchors(), spec.n_sensors(), out.b, out.p);
  out.residual = sol.objective;
  out.duality_gap = sol.duality_gap;
  return out;
}

namespace {

ParetoPoint solve_p1_impl(const LearningSpec& spec, double eps,
                          std::optional<double> known_eps_exact) {
  if (eps < 0.0 || eps >= 1.0) {
    throw std::invalid_argument("solve_p1: eps must be in [0, 1)");
  }
  const int m = spec.n_sensors();
  const int k = spec.n_anchors();
  Matrix b = Matrix::Zero(m, k);
  Matrix p = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const RowSolution rs = solve_row(spec, i, eps);
    b.row(i) = rs.b;
    p.row(i) = rs.p;
  }
  ParetoPoint pt = make_point(spec, eps, std::move(b), std::move(p));
  // Zero residual only happens at or past the exact threshold; compare
  // against it so callers can exclude out-of-range points.
  if (pt.delta <= 1e-12) {
    const double exact = known_eps_exact ? *known_eps_exact
                                         : solve_exact(spec).eps_exact;
    pt.beyond_exact = eps > exact + 1e-9;
  }
  return pt;
}

}  // namespace

ParetoPoint solve_p1(const LearningSpec& spec, double eps) {
  return solve_p1_impl(spec, eps, std::nullopt);
}

double utility(const ParetoPoint& pt) {
  if (pt.eps >= 1.0) {
    throw std::invalid_argument("utility: undefined at ||P|| = 1");
  }
  return pt.delta / (1.0 - pt.eps);
}

ExactDesign solve_exact(const LearningSpec& spec) {
  const int m = spec.n_sensors();
  const int k = spec.n_anchors();
  Matrix b = Matrix::Zero(m, k);
  Matrix p = Matrix::Zero(m, m);
  double eps_exact = 0.0;
  for (int i = 0; i < m; ++i) {
    const RowVars rv = row_vars(spec.graph, i);
    const RowVector w_row = spec.w.row(i);
    const LpSolution sol = solve_lp(build_p2_row(spec.w, w_row, rv));
    if (sol.status != LpStatus::Optimal) {
      return {kInf, std::nullopt};  // row equality system has no solution
    }
    if (sol.duality_gap > kGapTol) {
      throw std::runtime_error("solve_exact: duality gap exceeds tolerance");
    }
    RowVector br, pr;
    decode_row(sol.x, rv, k, m, br, pr);
    b.row(i) = br;
    p.row(i) = pr;
    eps_exact = std::max(eps_exact, sol.objective);
  }
  if (eps_exact >= 1.0) return {kInf, std::nullopt};
  return {eps_exact, std::make_pair(std::move(b), std::move(p))};
}

bool rank_condition_holds(const Matrix& b, const Matrix& w, double tol) {
  if (b.rows() != w.rows() || b.cols() != w.cols()) {
    throw std::invalid_argument("rank_condition_holds: shape mismatch");
  }
  return numerical_rank(b, tol) == numerical_rank(w, tol);
}

ParetoFront build_pareto_front(const LearningSpec& spec) {
  if (spec.eps_grid.empty()) {
    throw std::invalid_argument("build_pareto_front: empty grid");
  }
  const ExactDesign exact = solve_exact(spec);

  std::vector<double> budgets;
  for (double e : spec.eps_grid) {
    if (e <= exact.eps_exact) budgets.push_back(e);
  }
  if (std::isfinite(exact.eps_exact)) {
    if (budgets.empty() ||
        std::abs(budgets.back() - exact.eps_exact) > 1e-12) {
      budgets.push_back(exact.eps_exact);
    }
  } else {
    // Refine toward 1 so the left derivative of the front at 1 (the
    // infimum cost) can be read off the last segment.
    for (double e : {0.99, 0.999}) {
      if (budgets.empty() || e > budgets.back() + 1e-12) budgets.push_back(e);
    }
  }

  // Budget solves are independent; fan them out and assemble by index
  // so the result is identical to the sequential order.
  ParetoFront front{{}, exact.eps_exact, 0.0, spec};
  front.points.resize(budgets.size());
  const unsigned workers = std::min<unsigned>(
      std::max(1u, std::thread::hardware_concurrency()),
      static_cast<unsigned>(budgets.size()));
  std::atomic<std::size_t> cursor{0};
  std::mutex error_lock;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= budgets.size()) return;
      try {
        front.points[i] = solve_p1_impl(spec, budgets[i], exact.eps_exact);
      } catch (...) {
        const std::lock_guard<std::mutex> guard(error_lock);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  if (!std::isfinite(exact.eps_exact)) {
    const ParetoPoint& last = front.points.back();
    front.c_inf = last.delta / (1.0 - last.eps);
  }
  return front;
}

bool verify_front_optimality(const LearningSpec& spec, double eps,
                             int scan_points, double tol) {
  if (scan_points < 2) {
    throw std::invalid_argument("verify_front_optimality: need >= 2 points");
  }
  const ParetoPoint reference = solve_p1(spec, eps);

  double best_u = kInf;
  double best_eps = 0.0, best_delta = 0.0;
  for (int i = 0; i < scan_points; ++i) {
    const double e = eps * i / (scan_points - 1);
    const ParetoPoint pt = solve_p1(spec, e);
    const double u = pt.delta / (1.0 - e);
    // Largest budget among (near-)minimizers: fastest design at the
    // optimal cost.
    if (u < best_u - 1e-9 || (u <= best_u + 1e-9 && e > best_eps)) {
      best_u = std::min(best_u, u);
      best_eps = e;
      best_delta = pt.delta;
    }
  }
  return std::abs(best_eps - eps) <= tol &&
         std::abs(best_delta - reference.delta) <= tol;
}

TradeoffResult tradeoff_fixed_cost(const ParetoFront& front, double cost_cap) {
  for (const ParetoPoint& pt : front.points) {
    if (pt.utility <= cost_cap + 1e-9) {
      return make_tradeoff(front.spec, pt);
    }
  }
  throw UnachievableCostError(
      "tradeoff_fixed_cost: cost cap " + std::to_string(cost_cap) +
          " is below the infimum cost " + std::to_string(front.c_inf),
      front.c_inf);
}

TradeoffResult tradeoff_fixed_speed(const ParetoFront& front, double eps_a) {
  if (eps_a < 0.0 || eps_a >= 1.0) {
    throw std::invalid_argument("tradeoff_fixed_speed: eps must be in [0, 1)");
  }
  const double target = std::min(eps_a, front.eps_exact);
  for (const ParetoPoint& pt : front.points) {
    if (std::abs(pt.eps - target) <= 1e-12) {
      return make_tradeoff(front.spec, pt);
    }
  }
  return make_tradeoff(front.spec, solve_p1(front.spec, target));
}

}  // namespace hdc
