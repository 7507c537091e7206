// Shared test fixtures: scratch directories, quick builders for series and
// graphs, and tolerant comparisons.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "fconn/connectivity.hpp"
#include "fconn/ingest.hpp"
#include "fconn/rng.hpp"

namespace testutil {

/// Self-cleaning scratch directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 1000; ++attempt) {
      auto candidate = base / ("fconn_" + tag + "_" + std::to_string(counter_++));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline fconn::RoiTimeSeries make_series(
    const std::vector<std::vector<double>>& rows,
    std::vector<std::string> labels = {}, double tr = 2.0) {
  fconn::RoiTimeSeries ts;
  ts.subject_id = "test";
  const auto t = rows.size();
  const auto r = rows.empty() ? 0 : rows.front().size();
  if (labels.empty()) {
    for (std::size_t j = 0; j < r; ++j) labels.push_back("R" + std::to_string(j));
  }
  ts.region_labels = std::move(labels);
  ts.tr_seconds = tr;
  ts.data.resize(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(r));
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      ts.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return ts;
}

/// Graph with the given node count and explicit edge list.
inline fconn::BinaryGraph make_graph(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::string> labels;
  for (std::size_t v = 0; v < n; ++v) {
    labels.push_back(std::string(1, static_cast<char>('A' + v)));
  }
  fconn::BinaryGraph g(labels);
  for (const auto& [i, j] : edges) g.set_edge(i, j, true);
  return g;
}

/// Seeded random graph: every pair independently an edge with probability p.
inline fconn::BinaryGraph random_graph(std::size_t n, double p,
                                       std::uint64_t seed) {
  std::vector<std::string> labels;
  for (std::size_t v = 0; v < n; ++v) labels.push_back("N" + std::to_string(v));
  fconn::BinaryGraph g(labels);
  fconn::Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      g.set_edge(i, j, rng.uniform() < p);
    }
  }
  return g;
}

inline bool approx_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return a.size() == b.size() ? worst
                              : std::numeric_limits<double>::infinity();
}

}  // namespace testutil
