#include "fconn/features.hpp"

#include <cmath>

#include "text_util.hpp"

namespace fconn {

namespace {

void validate_class_counts(const std::vector<int>& labels,
                           const std::string& what) {
  std::size_t counts[2] = {0, 0};
  for (const int label : labels) ++counts[label];
  if (labels.size() < 4 || counts[0] < 2 || counts[1] < 2) {
    throw Error(ErrorCode::class_underpopulated,
                what + ": class counts are " + std::to_string(counts[0]) + "/" +
                    std::to_string(counts[1]) +
                    "; need >= 2 subjects in each class");
  }
}

}  // namespace

FeatureVector build_feature_vector(const NodeMetricTable& node,
                                   const GraphMetricPair& pair) {
  const std::size_t r = node.region_labels.size();
  const auto check = [&](const std::vector<double>& column, const char* name) {
    if (column.size() != r) {
      throw Error(ErrorCode::length_mismatch,
                  std::string(name) + " has " + std::to_string(column.size()) +
                      " entries for " + std::to_string(r) + " regions");
    }
  };
  check(node.clustering, "clustering");
  check(node.degree_centrality, "degree_centrality");
  check(node.closeness, "closeness");
  check(node.betweenness, "betweenness");
  check(node.avg_neighbor_degree, "avg_neighbor_degree");

  FeatureVector fv;
  fv.names.reserve(5 * r + 2);
  fv.values.reserve(5 * r + 2);
  const auto append = [&](const char* metric, const std::vector<double>& column) {
    for (std::size_t j = 0; j < r; ++j) {
      fv.names.push_back(std::string(metric) + "__" + node.region_labels[j]);
      fv.values.push_back(column[j]);
    }
  };
  append("clustering", node.clustering);
  append("degree_centrality", node.degree_centrality);
  append("closeness", node.closeness);
  append("betweenness", node.betweenness);
  append("avg_neighbor_degree", node.avg_neighbor_degree);
  fv.names.emplace_back("local_efficiency");
  fv.values.push_back(pair.local_efficiency);
  fv.names.emplace_back("global_efficiency");
  fv.values.push_back(pair.global_efficiency);
  return fv;
}

LabeledDataset assemble_dataset(
    const DatasetManifest& manifest,
    const std::map<std::string, FeatureVector>& vectors) {
  LabeledDataset ds;
  const FeatureVector* reference = nullptr;
  for (const auto& entry : manifest.entries) {
    const auto it = vectors.find(entry.subject_id);
    if (it == vectors.end()) {
      throw Error(ErrorCode::missing_subject_vector,
                  "no feature vector for subject '" + entry.subject_id + "'");
    }
    if (!reference) {
      reference = &it->second;
      ds.feature_names = reference->names;
      ds.matrix.resize(static_cast<Eigen::Index>(manifest.entries.size()),
                       static_cast<Eigen::Index>(reference->names.size()));
    } else if (it->second.names != reference->names) {
      throw Error(ErrorCode::feature_name_mismatch,
                  "subject '" + entry.subject_id +
                      "' has differently named/ordered features");
    }
    const auto row = static_cast<Eigen::Index>(ds.subject_ids.size());
    for (std::size_t j = 0; j < it->second.values.size(); ++j) {
      ds.matrix(row, static_cast<Eigen::Index>(j)) = it->second.values[j];
    }
    ds.subject_ids.push_back(entry.subject_id);
    ds.labels.push_back(entry.label);
  }
  validate_class_counts(ds.labels, "dataset");
  return ds;
}

void write_dataset_csv(const LabeledDataset& ds,
                       const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << "subject_id,label";
  for (const auto& name : ds.feature_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < ds.subjects(); ++i) {
    out << ds.subject_ids[i] << ',' << ds.labels[i];
    for (std::size_t j = 0; j < ds.features(); ++j) {
      out << ','
          << detail::format_double(ds.matrix(static_cast<Eigen::Index>(i),
                                             static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) {
    throw Error(ErrorCode::io_error, path.string() + " is empty");
  }
  const auto header = detail::split(lines.front(), ',');
  if (header.size() < 3 || header[0] != "subject_id" || header[1] != "label") {
    throw Error(ErrorCode::io_error,
                path.string() + ": expected header subject_id,label,<features>");
  }
  LabeledDataset ds;
  ds.feature_names.assign(header.begin() + 2, header.end());
  const std::size_t p = ds.feature_names.size();

  std::vector<std::vector<double>> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (detail::trim(lines[ln]).empty()) continue;
    const auto cells = detail::split(lines[ln], ',');
    if (cells.size() != p + 2) {
      throw Error(ErrorCode::ragged_rows,
                  path.string() + " row " + std::to_string(ln + 1) +
                      ": wrong cell count");
    }
    const auto label = detail::parse_long(cells[1]);
    if (!label || (*label != 0 && *label != 1)) {
      throw Error(ErrorCode::unknown_label,
                  path.string() + " row " + std::to_string(ln + 1) +
                      ": label '" + cells[1] + "'");
    }
    std::vector<double> values(p);
    for (std::size_t j = 0; j < p; ++j) {
      const auto value = detail::parse_double(cells[j + 2]);
      if (!value || !std::isfinite(*value)) {
        throw Error(ErrorCode::non_numeric_cell,
                    path.string() + " row " + std::to_string(ln + 1) +
                        ", feature '" + ds.feature_names[j] + "'");
      }
      values[j] = *value;
    }
    ds.subject_ids.push_back(std::string(detail::trim(cells[0])));
    ds.labels.push_back(static_cast<int>(*label));
    rows.push_back(std::move(values));
  }

  ds.matrix.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      ds.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  validate_class_counts(ds.labels, path.string());
  return ds;
}

}  // namespace fconn
