// Metric costs at atlas scale (117 regions) and above. Betweenness dominates;
// the other per-node metrics are near-free by comparison.
#include <benchmark/benchmark.h>

#include "fconn/graph_metrics.hpp"
#include "fconn/rng.hpp"

namespace {

fconn::BinaryGraph random_graph(std::size_t n, double p, std::uint64_t seed) {
  std::vector<std::string> labels;
  for (std::size_t v = 0; v < n; ++v) labels.push_back("R" + std::to_string(v));
  fconn::BinaryGraph g(labels);
  fconn::Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      g.set_edge(i, j, rng.uniform() < p);
    }
  }
  return g;
}

void BM_betweenness(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)), 0.1, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fconn::betweenness_centrality(g));
  }
}
BENCHMARK(BM_betweenness)->Arg(58)->Arg(117)->Arg(234);

void BM_node_metrics(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)), 0.1, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fconn::node_metrics(g));
  }
}
BENCHMARK(BM_node_metrics)->Arg(117);

void BM_local_efficiency(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)), 0.1, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fconn::local_efficiency(g));
  }
}
BENCHMARK(BM_local_efficiency)->Arg(117);

}  // namespace
