#include "hdc/io.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hdc {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

NetworkGraph load_network(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("network file " + path + ": " + e.what());
  }
  if (!j.contains("n") || !j.contains("k") || !j.contains("edges")) {
    throw std::runtime_error("network file " + path +
                             ": needs fields n, k, edges");
  }
  const int n = j["n"].get<int>();
  const int k = j["k"].get<int>();
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2) {
      throw std::runtime_error("network file " + path +
                               ": edges must be [l, j] pairs");
    }
    // File labels are 1-based.
    edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
  }
  return NetworkGraph(n, k, edges);
}

void save_network(const NetworkGraph& g, const std::string& path) {
  json j;
  j["n"] = g.n_total();
  j["k"] = g.n_anchors();
  json edges = json::array();
  for (int l = 0; l < g.n_total(); ++l) {
    for (int c = 0; c < g.n_total(); ++c) {
      if (g.adjacency(l, c)) edges.push_back({l + 1, c + 1});
    }
  }
  j["edges"] = std::move(edges);
  write_text_atomic(path, j.dump(2) + "\n");
}

Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw std::runtime_error("matrix file " + path + ": bad value '" +
                                 cell + "'");
      }
      while (used < cell.size() &&
             std::isspace(static_cast<unsigned char>(cell[used]))) {
        ++used;
      }
      if (used != cell.size()) {
        throw std::runtime_error("matrix file " + path + ": bad value '" +
                                 cell + "'");
      }
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  const std::size_t cols = rows[0].size();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw std::runtime_error("matrix file " + path + ": ragged rows");
    }
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  require_finite(m, "matrix file " + path);
  return m;
}

void save_matrix_csv(const Matrix& m, const std::string& path) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

void save_trajectory_csv(const Trajectory& traj,
                         const std::string& config_json,
                         const std::string& path) {
  std::string out = "# " + config_json + "\n";
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const long t = traj.snapshot_steps[s];
    out += std::to_string(t);
    const Matrix& x = traj.snapshots[s];
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        out += ',';
        out += format_double(x(i, j));
      }
    }
    out += ',';
    out += format_double(traj.error_norms[static_cast<std::size_t>(t)]);
    out += '\n';
  }
  write_text_atomic(path, out);
}

void save_front_csv(const ParetoFront& front, const std::string& path) {
  std::string out;
  for (const ParetoPoint& pt : front.points) {
    out += format_double(pt.eps);
    out += ',';
    out += format_double(pt.delta);
    out += ',';
    out += format_double(pt.utility);
    out += ',';
    out += format_double(pt.rho);
    out += '\n';
  }
  write_text_atomic(path, out);
}

namespace {

constexpr double kSvgW = 640.0, kSvgH = 480.0;
constexpr double kMargin = 56.0;

double sx(double eps) {
  return kMargin + eps * (kSvgW - 2.0 * kMargin);
}

double sy(double delta, double dmax) {
  return kSvgH - kMargin - (delta / dmax) * (kSvgH - 2.0 * kMargin);
}

std::string coord(double v) { return format_double(v, "%.2f"); }

}  // namespace

std::string render_front_svg(const ParetoFront& front,
                             const std::vector<double>& mark_eps) {
  double dmax = 1e-12;
  for (const ParetoPoint& pt : front.points) dmax = std::max(dmax, pt.delta);
  for (double me : mark_eps) {
    // Cost lines hit the vertical axis at the utility value.
    const ParetoPoint* nearest = nullptr;
    for (const ParetoPoint& pt : front.points) {
      if (!nearest || std::abs(pt.eps - me) < std::abs(nearest->eps - me)) {
        nearest = &pt;
      }
    }
    if (nearest) dmax = std::max(dmax, nearest->utility);
  }
  dmax *= 1.05;

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
       "height=\"480\" viewBox=\"0 0 640 480\">\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  // axes
  s += "<line x1=\"" + coord(sx(0)) + "\" y1=\"" + coord(sy(0, dmax)) +
       "\" x2=\"" + coord(sx(1)) + "\" y2=\"" + coord(sy(0, dmax)) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + coord(sx(0)) + "\" y1=\"" + coord(sy(0, dmax)) +
       "\" x2=\"" + coord(sx(0)) + "\" y2=\"" + coord(sy(dmax, dmax)) +
       "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double e = i / 5.0;
    s += "<text x=\"" + coord(sx(e)) + "\" y=\"" +
         coord(sy(0, dmax) + 18.0) +
         "\" font-size=\"11\" text-anchor=\"middle\">" +
         format_double(e, "%.1f") + "</text>\n";
    const double d = dmax * i / 5.0;
    s += "<text x=\"" + coord(sx(0) - 8.0) + "\" y=\"" +
         coord(sy(d, dmax) + 4.0) +
         "\" font-size=\"11\" text-anchor=\"end\">" +
         format_double(d, "%.3g") + "</text>\n";
  }
  s += "<text x=\"" + coord(kSvgW / 2) + "\" y=\"" + coord(kSvgH - 12.0) +
       "\" font-size=\"13\" text-anchor=\"middle\">norm budget</text>\n";
  s += "<text x=\"16\" y=\"" + coord(kSvgH / 2) +
       "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       coord(kSvgH / 2) + ")\">residual</text>\n";

  // cost lines: through (eps*, delta*) and (1, 0); intercept = utility
  for (double me : mark_eps) {
    const ParetoPoint* nearest = nullptr;
    for (const ParetoPoint& pt : front.points) {
      if (!nearest || std::abs(pt.eps - me) < std::abs(nearest->eps - me)) {
        nearest = &pt;
      }
    }
    if (!nearest) continue;
    const double u = nearest->utility;
    s += "<line x1=\"" + coord(sx(0)) + "\" y1=\"" + coord(sy(u, dmax)) +
         "\" x2=\"" + coord(sx(1)) + "\" y2=\"" + coord(sy(0, dmax)) +
         "\" stroke=\"#888888\" stroke-dasharray=\"5,4\"/>\n";
    s += "<circle cx=\"" + coord(sx(nearest->eps)) + "\" cy=\"" +
         coord(sy(nearest->delta, dmax)) +
         "\" r=\"4\" fill=\"#cc3311\"/>\n";
  }

  // the front itself
  if (!front.points.empty()) {
    s += "<polyline fill=\"none\" stroke=\"#0066cc\" stroke-width=\"2\" "
         "points=\"";
    for (std::size_t i = 0; i < front.points.size(); ++i) {
      if (i > 0) s += ' ';
      s += coord(sx(front.points[i].eps)) + "," +
           coord(sy(front.points[i].delta, dmax));
    }
    s += "\"/>\n";
    for (const ParetoPoint& pt : front.points) {
      s += "<circle cx=\"" + coord(sx(pt.eps)) + "\" cy=\"" +
           coord(sy(pt.delta, dmax)) + "\" r=\"2.5\" fill=\"#0066cc\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace hdc
