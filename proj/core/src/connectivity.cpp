#include "fconn/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "text_util.hpp"

namespace fconn {

ConnectivityMatrix pearson_matrix(const RoiTimeSeries& ts) {
  const auto t = static_cast<Eigen::Index>(ts.timepoints());
  const auto r = static_cast<Eigen::Index>(ts.regions());

  const Eigen::MatrixXd centered =
      ts.data.rowwise() - ts.data.colwise().mean();
  Eigen::VectorXd norms(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    norms(j) = centered.col(j).norm();
    const double sample_sd = norms(j) / std::sqrt(double(t - 1));
    if (!(sample_sd > 1e-12)) {
      throw Error(ErrorCode::zero_variance_region,
                  "region '" + ts.region_labels[j] + "' of subject '" +
                      ts.subject_id + "' has (near-)zero variance");
    }
  }

  ConnectivityMatrix cm;
  cm.region_labels = ts.region_labels;
  cm.values.resize(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    cm.values(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < r; ++j) {
      double corr = centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j));
      corr = std::clamp(corr, -1.0, 1.0);
      cm.values(i, j) = corr;
      cm.values(j, i) = corr;
    }
  }
  return cm;
}

BinaryGraph threshold_graph(const ConnectivityMatrix& cm, double tau) {
  if (!(tau > -1.0 && tau < 1.0)) {
    throw Error(ErrorCode::tau_out_of_range,
                "tau " + detail::format_double(tau) + " must lie in (-1, 1)");
  }
  const std::size_t r = cm.size();
  BinaryGraph graph(cm.region_labels);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      graph.set_edge(i, j, cm.values(static_cast<Eigen::Index>(i),
                                     static_cast<Eigen::Index>(j)) > tau);
    }
  }
  return graph;
}

BinaryGraph density_threshold(const ConnectivityMatrix& cm, double density) {
  if (!(density > 0.0 && density <= 1.0)) {
    throw Error(ErrorCode::density_out_of_range,
                "density " + detail::format_double(density) +
                    " must lie in (0, 1]");
  }
  const std::size_t r = cm.size();
  const std::size_t pairs = r * (r - 1) / 2;

  struct Entry {
    double value;
    std::size_t i, j;
  };
  std::vector<Entry> entries;
  entries.reserve(pairs);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      entries.push_back({cm.values(static_cast<Eigen::Index>(i),
                                   static_cast<Eigen::Index>(j)),
                         i, j});
    }
  }
  // strongest first; ties resolved toward the smaller (i, j) pair
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(b.value, a.i, a.j) < std::tie(a.value, b.i, b.j);
  });

  const auto want = static_cast<std::size_t>(
      std::ceil(density * double(pairs) - 1e-9));
  const std::size_t kept = std::min(std::max<std::size_t>(want, 1), pairs);

  BinaryGraph graph(cm.region_labels);
  for (std::size_t k = 0; k < kept && k < entries.size(); ++k) {
    graph.set_edge(entries[k].i, entries[k].j, true);
  }
  return graph;
}

void write_connectivity_csv(const ConnectivityMatrix& cm,
                            const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << "region";
  for (const auto& label : cm.region_labels) out << ',' << label;
  out << '\n';
  const auto r = static_cast<Eigen::Index>(cm.size());
  for (Eigen::Index i = 0; i < r; ++i) {
    out << cm.region_labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < r; ++j) {
      out << ',' << detail::format_double(cm.values(i, j));
    }
    out << '\n';
  }
}

ConnectivityMatrix read_connectivity_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.size() < 2) {
    throw Error(ErrorCode::io_error,
                path.string() + ": matrix file too short");
  }
  auto header = detail::split(lines.front(), ',');
  if (header.size() < 3) {
    throw Error(ErrorCode::io_error,
                path.string() + ": matrix header too short");
  }
  ConnectivityMatrix cm;
  cm.region_labels.assign(header.begin() + 1, header.end());
  const auto r = cm.region_labels.size();
  cm.values.resize(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  if (lines.size() < r + 1) {
    throw Error(ErrorCode::io_error,
                path.string() + ": expected " + std::to_string(r) + " rows");
  }
  for (std::size_t i = 0; i < r; ++i) {
    const auto cells = detail::split(lines[i + 1], ',');
    if (cells.size() != r + 1) {
      throw Error(ErrorCode::ragged_rows,
                  path.string() + " row " + std::to_string(i + 2) +
                      ": wrong cell count");
    }
    for (std::size_t j = 0; j < r; ++j) {
      const auto value = detail::parse_double(cells[j + 1]);
      if (!value) {
        throw Error(ErrorCode::non_numeric_cell,
                    path.string() + " row " + std::to_string(i + 2) +
                        ": bad number '" + cells[j + 1] + "'");
      }
      cm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          *value;
    }
  }
  return cm;
}

void write_graph_csv(const BinaryGraph& graph,
                     const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << "region";
  for (const auto& label : graph.region_labels()) out << ',' << label;
  out << '\n';
  const std::size_t r = graph.size();
  for (std::size_t i = 0; i < r; ++i) {
    out << graph.region_labels()[i];
    for (std::size_t j = 0; j < r; ++j) {
      out << ',' << (graph.edge(i, j) ? 1 : 0);
    }
    out << '\n';
  }
}

BinaryGraph read_graph_csv(const std::filesystem::path& path) {
  const auto cm = read_connectivity_csv(path);
  BinaryGraph graph(cm.region_labels);
  const std::size_t r = cm.size();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      graph.set_edge(i, j,
                     cm.values(static_cast<Eigen::Index>(i),
                               static_cast<Eigen::Index>(j)) != 0.0);
    }
  }
  return graph;
}

}  // namespace fconn
