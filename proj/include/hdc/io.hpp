#pragma once

#include "hdc/forward.hpp"
#include "hdc/graph.hpp"
#include "hdc/learning.hpp"
#include "hdc/linalg.hpp"

#include <string>
#include <vector>

namespace hdc {

/// Network JSON: {"n": N, "k": K, "edges": [[l, j], ...]} with 1-based
/// node labels, edge [l, j] meaning l <- j. Sensor self-loops are added
/// implicitly if absent.
NetworkGraph load_network(const std::string& path);
void save_network(const NetworkGraph& g, const std::string& path);

/// Matrix CSV: plain comma-separated rows, no header. Written with 17
/// significant digits so values round-trip exactly.
Matrix load_matrix_csv(const std::string& path);
void save_matrix_csv(const Matrix& m, const std::string& path);

/// Trajectory CSV: one JSON comment line ("# {...}") echoing the run
/// configuration, then rows t, x_<sensor>_<component>..., error_norm
/// for every stored snapshot.
void save_trajectory_csv(const Trajectory& traj,
                         const std::string& config_json,
                         const std::string& path);

/// Front CSV rows: eps, delta, utility, spectral_radius. No header.
void save_front_csv(const ParetoFront& front, const std::string& path);

/// Deterministic SVG of the front with the constant-cost line through
/// (eps*, delta(eps*)) and (1, 0) for each marked budget (snapped to
/// the nearest front point).
std::string render_front_svg(const ParetoFront& front,
                             const std::vector<double>& mark_eps);

/// All writers above go through this: write to a temp file in the same
/// directory, then rename over the target.
void write_text_atomic(const std::string& path, const std::string& content);

std::string format_double(double v, const char* fmt = "%.17g");

}  // namespace hdc
