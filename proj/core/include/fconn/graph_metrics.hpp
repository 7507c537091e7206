// Graph-theoretic metrics on the thresholded connectivity graph: five
// per-node measures (clustering coefficient, degree centrality, closeness
// centrality, betweenness centrality, average neighbor degree) and two
// whole-graph measures (local and global efficiency).
//
// All distances are unweighted shortest-path hop counts from breadth-first
// search; disconnected pairs contribute 1/inf = 0 wherever an inverse
// distance is summed.
#pragma once

#include <string>
#include <vector>

#include "fconn/connectivity.hpp"

namespace fconn {

struct NodeMetricTable {
  std::vector<std::string> region_labels;
  std::vector<double> clustering;
  std::vector<double> degree_centrality;
  std::vector<double> closeness;
  std::vector<double> betweenness;
  std::vector<double> avg_neighbor_degree;
};

struct GraphMetricPair {
  double local_efficiency = 0.0;
  double global_efficiency = 0.0;
};

/// c_v = 2 e_v / (k_v (k_v - 1)) with e_v the edge count among v's neighbors;
/// 0 when deg(v) < 2.
std::vector<double> clustering_coefficient(const BinaryGraph& g);

/// deg(v) / (n - 1).
std::vector<double> degree_centrality(const BinaryGraph& g);

/// Component-size-scaled closeness: with S_v the nodes reachable from v and
/// m = |S_v|, closeness = (m / sum of distances) * (m / (n - 1)); 0 for
/// isolated nodes.
std::vector<double> closeness_centrality(const BinaryGraph& g);

/// Shortest-path betweenness over unordered pairs s < t, normalized by
/// 2 / ((n-1)(n-2)); zeros when n < 3. Brandes accumulation.
std::vector<double> betweenness_centrality(const BinaryGraph& g);

/// Mean degree over v's neighbors; 0 for isolated nodes.
std::vector<double> average_neighbor_degree(const BinaryGraph& g);

/// Mean inverse shortest-path length over ordered pairs,
/// (1/(n(n-1))) * sum 1/d(i,j); 0 when n < 2.
double global_efficiency(const BinaryGraph& g);

/// Mean over nodes of the global efficiency of the subgraph induced by the
/// node's neighbors; nodes with fewer than two neighbors contribute 0.
double local_efficiency(const BinaryGraph& g);

/// All five per-node metrics in one pass bundle.
NodeMetricTable node_metrics(const BinaryGraph& g);

/// Both efficiency metrics.
GraphMetricPair efficiency_metrics(const BinaryGraph& g);

}  // namespace fconn
