#pragma once

#include "hdc/linalg.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hdc {

/// Directed communication graph over N nodes split into K anchors
/// (indices 0..K-1) and M = N-K sensors (indices K..N-1). Edge (l, j)
/// means node l can receive from node j. Sensors always carry a
/// self-loop; node indices are 0-based throughout the API (network
/// files use 1-based labels and are remapped on load).
///
/// Immutable after construction.
class NetworkGraph {
public:
  /// Edges are 0-based (l, j) pairs, l <- j. Sensor self-loops are
  /// added if absent. Throws std::invalid_argument for K >= N, K < 0,
  /// or out-of-range edges. A sensor with no anchor reachable only
  /// produces an entry in warnings().
  NetworkGraph(int n_total, int n_anchors,
               const std::vector<std::pair<int, int>>& edges);

  int n_total() const { return n_; }
  int n_anchors() const { return k_; }
  int n_sensors() const { return n_ - k_; }

  bool is_anchor(int node) const { return node >= 0 && node < k_; }
  bool is_sensor(int node) const { return node >= k_ && node < n_; }

  /// a_lj: 1 iff l can receive from j.
  int adjacency(int l, int j) const { return adj_[index(l, j)]; }

  struct Neighborhood {
    std::vector<int> sensors;  // K_Omega(l), sorted
    std::vector<int> anchors;  // K_kappa(l), sorted
  };

  /// Neighborhood of sensor l split into sensor and anchor parts.
  /// Throws std::out_of_range for bad indices, std::invalid_argument
  /// if l is an anchor.
  Neighborhood neighborhoods(int l) const;

  /// Non-fatal validation notes (e.g. sensors with no path from any
  /// anchor).
  const std::vector<std::string>& warnings() const { return warnings_; }

private:
  std::size_t index(int l, int j) const;

  int n_ = 0;
  int k_ = 0;
  std::vector<std::uint8_t> adj_;  // row-major N x N
  std::vector<std::string> warnings_;
};

/// Zero positions of the lower M x N adjacency block: pair (i, j) with
/// i in [0, M) the sensor row (sensor node K+i) and j in [0, N) the
/// source node. Sorted lexicographically.
struct SparsityPattern {
  std::vector<std::pair<int, int>> forbidden;
};

SparsityPattern sparsity_pattern(const NetworkGraph& g);

/// True iff the M x N matrix F = [B | P] is zero at every forbidden
/// position of g. Throws std::invalid_argument on dimension mismatch.
bool respects_sparsity(const Matrix& f, const NetworkGraph& g);

}  // namespace hdc
