// Pearson functional-connectivity matrices and their thresholded binary
// graphs. The graph is always simple: symmetric adjacency, no self-loops.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fconn/error.hpp"
#include "fconn/ingest.hpp"

namespace fconn {

/// R x R sample Pearson correlations; symmetric, unit diagonal, off-diagonal
/// values in [-1, 1].
struct ConnectivityMatrix {
  std::vector<std::string> region_labels;
  Eigen::MatrixXd values;

  std::size_t size() const { return region_labels.size(); }
};

/// Undirected simple graph over the regions.
class BinaryGraph {
 public:
  BinaryGraph() = default;
  explicit BinaryGraph(std::vector<std::string> labels)
      : labels_(std::move(labels)), n_(labels_.size()), adj_(n_ * n_, 0) {}

  std::size_t size() const { return n_; }
  const std::vector<std::string>& region_labels() const { return labels_; }

  bool edge(std::size_t i, std::size_t j) const { return adj_[i * n_ + j] != 0; }

  void set_edge(std::size_t i, std::size_t j, bool present) {
    if (i == j) return;  // simple graph
    adj_[i * n_ + j] = adj_[j * n_ + i] = present ? 1 : 0;
  }

  std::size_t degree(std::size_t v) const {
    std::size_t d = 0;
    for (std::size_t u = 0; u < n_; ++u) d += adj_[v * n_ + u];
    return d;
  }

  std::vector<std::size_t> neighbors(std::size_t v) const {
    std::vector<std::size_t> out;
    for (std::size_t u = 0; u < n_; ++u) {
      if (adj_[v * n_ + u]) out.push_back(u);
    }
    return out;
  }

  std::size_t edge_count() const {
    std::size_t total = 0;
    for (const auto cell : adj_) total += cell;
    return total / 2;
  }

  /// Fraction of possible edges present.
  double density() const {
    const std::size_t pairs = n_ * (n_ - 1) / 2;
    return pairs == 0 ? 0.0 : double(edge_count()) / double(pairs);
  }

  bool operator==(const BinaryGraph& other) const = default;

 private:
  std::vector<std::string> labels_;
  std::size_t n_ = 0;
  std::vector<std::uint8_t> adj_;  // dense row-major, symmetric
};

/// Sample Pearson correlation of every column pair; diagonal set to exactly
/// 1. Throws ZeroVarianceRegion naming the first region whose sample standard
/// deviation is <= 1e-12.
ConnectivityMatrix pearson_matrix(const RoiTimeSeries& ts);

/// Edge (i, j) exists iff values(i, j) > tau, strictly; tau must lie in
/// (-1, 1). Throws TauOutOfRange.
BinaryGraph threshold_graph(const ConnectivityMatrix& cm, double tau);

/// Keep the ceil(density * R(R-1)/2) strongest upper-triangle entries as
/// edges; ties at the cut broken toward the lexicographically smallest
/// (i, j) index pair. density must lie in (0, 1]. Throws DensityOutOfRange.
BinaryGraph density_threshold(const ConnectivityMatrix& cm, double density);

// CSV export/import with a header row and leading label column; both
// round-trip exactly.
void write_connectivity_csv(const ConnectivityMatrix& cm,
                            const std::filesystem::path& path);
ConnectivityMatrix read_connectivity_csv(const std::filesystem::path& path);
void write_graph_csv(const BinaryGraph& graph, const std::filesystem::path& path);
BinaryGraph read_graph_csv(const std::filesystem::path& path);

}  // namespace fconn
