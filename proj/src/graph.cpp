#include "hdc/graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace hdc {

NetworkGraph::NetworkGraph(int n_total, int n_anchors,
                           const std::vector<std::pair<int, int>>& edges)
    : n_(n_total), k_(n_anchors) {
  if (n_ <= 0) {
    throw std::invalid_argument("NetworkGraph: node count must be positive");
  }
  if (k_ < 0 || k_ >= n_) {
    throw std::invalid_argument(
        "NetworkGraph: anchor count must satisfy 0 <= K < N (K=" +
        std::to_string(k_) + ", N=" + std::to_string(n_) + ")");
  }
  adj_.assign(static_cast<std::size_t>(n_) * n_, 0);
  for (const auto& [l, j] : edges) {
    if (l < 0 || l >= n_ || j < 0 || j >= n_) {
      throw std::invalid_argument("NetworkGraph: edge (" + std::to_string(l) +
                                  ", " + std::to_string(j) +
                                  ") out of range");
    }
    adj_[index(l, j)] = 1;
  }
  // Sensor self-loops are always permitted: p_ll is a design variable.
  for (int l = k_; l < n_; ++l) {
    adj_[index(l, l)] = 1;
  }

  // Sensors with no directed path from any anchor are legal but the
  // learned residual for them can only be large; flag, don't reject.
  if (k_ > 0) {
    std::vector<char> reached(static_cast<std::size_t>(n_), 0);
    std::queue<int> frontier;
    for (int a = 0; a < k_; ++a) {
      reached[a] = 1;
      frontier.push(a);
    }
    while (!frontier.empty()) {
      const int j = frontier.front();
      frontier.pop();
      for (int l = 0; l < n_; ++l) {
        if (!reached[l] && adj_[index(l, j)]) {
          reached[l] = 1;
          frontier.push(l);
        }
      }
    }
    for (int l = k_; l < n_; ++l) {
      if (!reached[l]) {
        warnings_.push_back("sensor " + std::to_string(l) +
                            " has no directed path from any anchor");
      }
    }
  }
}

std::size_t NetworkGraph::index(int l, int j) const {
  return static_cast<std::size_t>(l) * n_ + j;
}

NetworkGraph::Neighborhood NetworkGraph::neighborhoods(int l) const {
  if (l < 0 || l >= n_) {
    throw std::out_of_range("neighborhoods: node " + std::to_string(l) +
                            " out of range");
  }
  if (is_anchor(l)) {
    throw std::invalid_argument("neighborhoods: node " + std::to_string(l) +
                                " is an anchor, not a sensor");
  }
  Neighborhood nb;
  for (int j = 0; j < n_; ++j) {
    if (!adj_[index(l, j)]) continue;
    if (j < k_) {
      nb.anchors.push_back(j);
    } else {
      nb.sensors.push_back(j);
    }
  }
  return nb;
}

SparsityPattern sparsity_pattern(const NetworkGraph& g) {
  SparsityPattern pat;
  const int m = g.n_sensors();
  const int n = g.n_total();
  const int k = g.n_anchors();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!g.adjacency(k + i, j)) {
        pat.forbidden.emplace_back(i, j);
      }
    }
  }
  return pat;  // row-major scan is already lexicographic
}

bool respects_sparsity(const Matrix& f, const NetworkGraph& g) {
  if (f.rows() != g.n_sensors() || f.cols() != g.n_total()) {
    throw std::invalid_argument(
        "respects_sparsity: F must be M x N for this graph");
  }
  const int m = g.n_sensors();
  const int n = g.n_total();
  const int k = g.n_anchors();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!g.adjacency(k + i, j) && f(i, j) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace hdc
