#include "fconn/graph_metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <stack>

namespace fconn {

namespace {

constexpr int kUnreached = -1;

// Hop distances from source via BFS; kUnreached for unreachable nodes.
std::vector<int> bfs_distances(const std::vector<std::vector<std::size_t>>& adj,
                               std::size_t source) {
  std::vector<int> dist(adj.size(), kUnreached);
  dist[source] = 0;
  std::queue<std::size_t> frontier;
  frontier.push(source);
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (const std::size_t v : adj[u]) {
      if (dist[v] == kUnreached) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

std::vector<std::vector<std::size_t>> adjacency_lists(const BinaryGraph& g) {
  std::vector<std::vector<std::size_t>> adj(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) adj[v] = g.neighbors(v);
  return adj;
}

double efficiency_of(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const auto dist = bfs_distances(adj, s);
    for (std::size_t t = 0; t < n; ++t) {
      if (t != s && dist[t] != kUnreached) total += 1.0 / double(dist[t]);
    }
  }
  return total / (double(n) * double(n - 1));
}

}  // namespace

std::vector<double> clustering_coefficient(const BinaryGraph& g) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto nbrs = g.neighbors(v);
    const std::size_t k = nbrs.size();
    if (k < 2) continue;
    std::size_t linked = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        if (g.edge(nbrs[a], nbrs[b])) ++linked;
      }
    }
    out[v] = 2.0 * double(linked) / (double(k) * double(k - 1));
  }
  return out;
}

std::vector<double> degree_centrality(const BinaryGraph& g) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  for (std::size_t v = 0; v < n; ++v) {
    out[v] = double(g.degree(v)) / double(n - 1);
  }
  return out;
}

std::vector<double> closeness_centrality(const BinaryGraph& g) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  const auto adj = adjacency_lists(g);
  for (std::size_t v = 0; v < n; ++v) {
    const auto dist = bfs_distances(adj, v);
    double total = 0.0;
    std::size_t reached = 0;
    for (std::size_t u = 0; u < n; ++u) {
      if (u != v && dist[u] != kUnreached) {
        total += double(dist[u]);
        ++reached;
      }
    }
    if (reached == 0) continue;
    out[v] = (double(reached) / total) * (double(reached) / double(n - 1));
  }
  return out;
}

std::vector<double> betweenness_centrality(const BinaryGraph& g) {
  const std::size_t n = g.size();
  std::vector<double> accum(n, 0.0);
  if (n < 3) return accum;
  const auto adj = adjacency_lists(g);

  // Brandes: one BFS per source with dependency back-propagation. The
  // accumulation counts each unordered pair twice; halved below.
  std::vector<double> sigma(n), delta(n);
  std::vector<int> dist(n);
  std::vector<std::vector<std::size_t>> preds(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), kUnreached);
    for (auto& p : preds) p.clear();

    std::vector<std::size_t> order;
    order.reserve(n);
    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<std::size_t> frontier;
    frontier.push(s);
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      order.push_back(u);
      for (const std::size_t w : adj[u]) {
        if (dist[w] == kUnreached) {
          dist[w] = dist[u] + 1;
          frontier.push(w);
        }
        if (dist[w] == dist[u] + 1) {
          sigma[w] += sigma[u];
          preds[w].push_back(u);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t w = *it;
      for (const std::size_t u : preds[w]) {
        delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) accum[w] += delta[w];
    }
  }

  const double scale = 1.0 / (double(n - 1) * double(n - 2));  // 0.5 * 2/((n-1)(n-2))
  for (auto& value : accum) value *= scale;
  return accum;
}

std::vector<double> average_neighbor_degree(const BinaryGraph& g) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto nbrs = g.neighbors(v);
    if (nbrs.empty()) continue;
    std::size_t total = 0;
    for (const std::size_t u : nbrs) total += g.degree(u);
    out[v] = double(total) / double(nbrs.size());
  }
  return out;
}

double global_efficiency(const BinaryGraph& g) {
  return efficiency_of(adjacency_lists(g));
}

double local_efficiency(const BinaryGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto nbrs = g.neighbors(v);
    if (nbrs.size() < 2) continue;

    // induced subgraph on v's neighbors, reindexed 0..m-1
    std::vector<std::vector<std::size_t>> sub(nbrs.size());
    for (std::size_t a = 0; a < nbrs.size(); ++a) {
      for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
        if (g.edge(nbrs[a], nbrs[b])) {
          sub[a].push_back(b);
          sub[b].push_back(a);
        }
      }
    }
    total += efficiency_of(sub);
  }
  return total / double(n);
}

NodeMetricTable node_metrics(const BinaryGraph& g) {
  NodeMetricTable table;
  table.region_labels = g.region_labels();
  table.clustering = clustering_coefficient(g);
  table.degree_centrality = degree_centrality(g);
  table.closeness = closeness_centrality(g);
  table.betweenness = betweenness_centrality(g);
  table.avg_neighbor_degree = average_neighbor_degree(g);
  return table;
}

GraphMetricPair efficiency_metrics(const BinaryGraph& g) {
  return {local_efficiency(g), global_efficiency(g)};
}

}  // namespace fconn
