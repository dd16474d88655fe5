// Command-line front end: simulate anchored iterations, analyze systems,
// learn weights for a target map, build residual-vs-budget fronts, and
// answer cost/speed tradeoff queries.
//
// Exit codes: 0 success, 1 malformed input, 2 divergent system,
// 3 unachievable cost.

#include "hdc/forward.hpp"
#include "hdc/graph.hpp"
#include "hdc/io.hpp"
#include "hdc/learning.hpp"
#include "hdc/linalg.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using hdc::Matrix;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitDivergent = 2;
constexpr int kExitUnachievable = 3;

json json_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::vector<double> parse_eps_grid(const std::string& text) {
  if (text.empty()) return {};
  if (text.find(',') == std::string::npos &&
      text.find('.') == std::string::npos) {
    const int count = std::stoi(text);
    if (count < 1) throw std::runtime_error("--eps-grid count must be >= 1");
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) {
      grid[i] = count == 1 ? 0.0 : 0.99 * i / (count - 1);
    }
    return grid;
  }
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    grid.push_back(std::stod(cell));
  }
  return grid;
}

struct CommonArgs {
  std::string network;
  std::string out = ".";
  long seed = 0;
};

void write_report(const std::string& dir, const std::string& name,
                  const json& j) {
  hdc::write_text_atomic(dir + "/" + name, j.dump(2) + "\n");
}

int cmd_simulate(const CommonArgs& common, const std::string& b_path,
                 const std::string& p_path, const std::string& u0_path,
                 const std::string& x0_path, double tol, long max_iters) {
  const hdc::NetworkGraph g = hdc::load_network(common.network);
  for (const auto& w : g.warnings()) std::cerr << "warning: " << w << "\n";
  const Matrix b = hdc::load_matrix_csv(b_path);
  const Matrix p = hdc::load_matrix_csv(p_path);
  const Matrix u0 = hdc::load_matrix_csv(u0_path);
  const Matrix x0 = hdc::load_matrix_csv(x0_path);
  const hdc::IterationSystem sys(b, p, g);

  json config{{"command", "simulate"}, {"network", common.network},
              {"tol", tol},            {"max_iters", max_iters},
              {"seed", common.seed},   {"spectral_radius", sys.rho()}};
  try {
    const hdc::Trajectory traj = hdc::run(sys, u0, x0, tol, max_iters);
    hdc::save_trajectory_csv(traj, config.dump(),
                             common.out + "/trajectory.csv");
    double decay = -std::numeric_limits<double>::infinity();
    try {
      decay = hdc::decay_exponent(traj);
    } catch (const std::invalid_argument&) {
    }
    json summary{{"spectral_radius", sys.rho()},
                 {"iterations", traj.iterations},
                 {"final_error", traj.error_norms.back()},
                 {"decay_exponent", json_or_null(decay)},
                 {"converged", true}};
    write_report(common.out, "summary.json", summary);
    return kExitOk;
  } catch (const hdc::MaxItersExceeded& e) {
    hdc::save_trajectory_csv(e.partial(), config.dump(),
                             common.out + "/trajectory.csv");
    json summary{{"spectral_radius", sys.rho()},
                 {"iterations", e.partial().iterations},
                 {"final_error", e.partial().error_norms.back()},
                 {"decay_exponent", nullptr},
                 {"converged", false}};
    write_report(common.out, "summary.json", summary);
    std::cerr << e.what() << "\n";
    return kExitDivergent;
  }
}

int cmd_analyze(const CommonArgs& common, const std::string& b_path,
                const std::string& p_path, long m_width) {
  const hdc::NetworkGraph g = hdc::load_network(common.network);
  const Matrix b = hdc::load_matrix_csv(b_path);
  const Matrix p = hdc::load_matrix_csv(p_path);
  const hdc::IterationSystem sys(b, p, g);

  json report{
      {"spectral_radius", sys.rho()},
      {"p_inf_norm", hdc::induced_norm(p, hdc::NormKind::Infinity)},
      {"p_one_norm", hdc::induced_norm(p, hdc::NormKind::One)},
      {"rank_b", hdc::numerical_rank(b)},
      {"convergent", sys.convergent()},
      {"consensus", nullptr}};
  if (g.n_anchors() < g.n_sensors() && sys.convergent()) {
    const auto dim = hdc::consensus_dimension(sys, m_width);
    report["consensus"] =
        json{{"subspace_dim", dim.subspace_dim}, {"hdc_dim", dim.hdc_dim}};
  }
  write_report(common.out, "analyze.json", report);
  return kExitOk;
}

int cmd_learn(const CommonArgs& common, const std::string& w_path,
              double eps) {
  const hdc::NetworkGraph g = hdc::load_network(common.network);
  const Matrix w = hdc::load_matrix_csv(w_path);
  const hdc::LearningSpec spec(g, w);
  const hdc::ParetoPoint pt = hdc::solve_p1(spec, eps);
  hdc::save_matrix_csv(pt.b, common.out + "/B.csv");
  hdc::save_matrix_csv(pt.p, common.out + "/P.csv");
  json report{{"eps", pt.eps},          {"delta", pt.delta},
              {"utility", pt.utility},  {"p_inf_norm", pt.p_norm},
              {"spectral_radius", pt.rho}};
  write_report(common.out, "learn.json", report);
  return kExitOk;
}

std::string eps_tag(double eps) { return hdc::format_double(eps, "%.6f"); }

int cmd_pareto(const CommonArgs& common, const std::string& w_path,
               const std::string& grid_text,
               const std::vector<double>& mark_eps) {
  const hdc::NetworkGraph g = hdc::load_network(common.network);
  const Matrix w = hdc::load_matrix_csv(w_path);
  const hdc::LearningSpec spec(g, w, parse_eps_grid(grid_text));
  const hdc::ParetoFront front = hdc::build_pareto_front(spec);

  hdc::save_front_csv(front, common.out + "/front.csv");
  for (const hdc::ParetoPoint& pt : front.points) {
    const std::string tag = eps_tag(pt.eps);
    hdc::save_matrix_csv(pt.b, common.out + "/solutions/B_" + tag + ".csv");
    hdc::save_matrix_csv(pt.p, common.out + "/solutions/P_" + tag + ".csv");
  }
  hdc::write_text_atomic(common.out + "/pareto.svg",
                         hdc::render_front_svg(front, mark_eps));
  json report{{"points", front.points.size()},
              {"eps_exact", json_or_null(front.eps_exact)},
              {"exact_solution_exists", std::isfinite(front.eps_exact)},
              {"c_inf", front.c_inf}};
  write_report(common.out, "pareto.json", report);
  return kExitOk;
}

int cmd_tradeoff(const CommonArgs& common, const std::string& w_path,
                 const std::string& grid_text, std::optional<double> cost,
                 std::optional<double> speed) {
  if (cost.has_value() == speed.has_value()) {
    std::cerr << "tradeoff: exactly one of --cost or --speed is required\n";
    return kExitInput;
  }
  const hdc::NetworkGraph g = hdc::load_network(common.network);
  const Matrix w = hdc::load_matrix_csv(w_path);
  const hdc::LearningSpec spec(g, w, parse_eps_grid(grid_text));
  const hdc::ParetoFront front = hdc::build_pareto_front(spec);

  hdc::TradeoffResult res;
  try {
    res = cost ? hdc::tradeoff_fixed_cost(front, *cost)
               : hdc::tradeoff_fixed_speed(front, *speed);
  } catch (const hdc::UnachievableCostError& e) {
    std::cerr << e.what() << "\n";
    return kExitUnachievable;
  }
  hdc::save_matrix_csv(res.b, common.out + "/B.csv");
  hdc::save_matrix_csv(res.p, common.out + "/P.csv");
  json report{{"operating_eps", res.operating_eps},
              {"cost", res.operating_cost},
              {"e_ss_bound", res.e_ss_bound},
              {"e_ss_actual", res.e_ss_actual},
              {"rho_P", hdc::spectral_radius(res.p)},
              {"line_slope", res.line_slope},
              {"line_intercept", res.line_intercept}};
  write_report(common.out, "report.json", report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anchored-consensus simulation and weight-design toolkit"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string b_path, p_path, u0_path, x0_path, w_path, grid_text;
  double tol = 1e-10, eps = 0.0;
  long max_iters = 1000000, m_width = 1;
  std::vector<double> mark_eps;
  std::optional<double> cost, speed;

  auto add_common = [&](CLI::App* cmd, bool needs_network = true) {
    auto* net = cmd->add_option("--network", common.network,
                                "network JSON file");
    if (needs_network) net->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", common.out, "output directory");
    cmd->add_option("--seed", common.seed, "seed echoed into run configs");
  };

  CLI::App* sim = app.add_subcommand("simulate", "run the iteration");
  add_common(sim);
  sim->add_option("--b", b_path, "B matrix CSV")->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--p", p_path, "P matrix CSV")->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--u0", u0_path, "anchor states CSV")->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--x0", x0_path, "initial sensor states CSV")->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--tol", tol, "successive-difference stop tolerance");
  sim->add_option("--max-iters", max_iters, "iteration budget");

  CLI::App* ana = app.add_subcommand("analyze", "report system properties");
  add_common(ana);
  ana->add_option("--b", b_path, "B matrix CSV")->required()
      ->check(CLI::ExistingFile);
  ana->add_option("--p", p_path, "P matrix CSV")->required()
      ->check(CLI::ExistingFile);
  ana->add_option("--m", m_width, "state width");

  CLI::App* lrn = app.add_subcommand("learn", "design (B, P) at one budget");
  add_common(lrn);
  lrn->add_option("--weights", w_path, "target W CSV")->required()
      ->check(CLI::ExistingFile);
  lrn->add_option("--eps", eps, "norm budget in [0, 1)")->required();

  CLI::App* par = app.add_subcommand("pareto", "trace the residual front");
  add_common(par);
  par->add_option("--weights", w_path, "target W CSV")->required()
      ->check(CLI::ExistingFile);
  par->add_option("--eps-grid", grid_text,
                  "point count or comma-separated budgets");
  par->add_option("--mark-eps", mark_eps, "budgets to mark with cost lines");

  CLI::App* tro = app.add_subcommand("tradeoff", "pick an operating point");
  add_common(tro);
  tro->add_option("--weights", w_path, "target W CSV")->required()
      ->check(CLI::ExistingFile);
  tro->add_option("--eps-grid", grid_text,
                  "point count or comma-separated budgets");
  double cost_val = 0.0, speed_val = 0.0;
  auto* cost_opt = tro->add_option("--cost", cost_val, "utility cost cap");
  auto* speed_opt = tro->add_option("--speed", speed_val,
                                    "norm budget cap in [0, 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return kExitInput;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(common, b_path, p_path, u0_path, x0_path, tol,
                          max_iters);
    }
    if (ana->parsed()) return cmd_analyze(common, b_path, p_path, m_width);
    if (lrn->parsed()) return cmd_learn(common, w_path, eps);
    if (par->parsed()) return cmd_pareto(common, w_path, grid_text, mark_eps);
    if (tro->parsed()) {
      if (cost_opt->count() > 0) cost = cost_val;
      if (speed_opt->count() > 0) speed = speed_val;
      return cmd_tradeoff(common, w_path, grid_text, cost, speed);
    }
  } catch (const hdc::DivergentSystemError& e) {
    std::cerr << e.what() << "\n";
    return kExitDivergent;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
