// Per-subject feature vectors (5R + 2 named values) and their aggregation
// into a labeled dataset. Ordering is contractual: the five per-node metric
// blocks in a fixed sequence, region-minor, then the two efficiency scalars.
#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fconn/graph_metrics.hpp"
#include "fconn/ingest.hpp"

namespace fconn {

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;

  bool operator==(const FeatureVector&) const = default;
};

/// N subjects by P features with labels; feature names are identical across
/// subjects by construction.
struct LabeledDataset {
  std::vector<std::string> subject_ids;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd matrix;  // N x P

  std::size_t subjects() const { return subject_ids.size(); }
  std::size_t features() const { return feature_names.size(); }
};

/// Concatenate the metric blocks in order clustering, degree_centrality,
/// closeness, betweenness, avg_neighbor_degree (one entry per region, named
/// `<metric>__<region>`), then local_efficiency and global_efficiency.
/// Length is always 5R + 2. Throws LengthMismatch on inconsistent inputs.
FeatureVector build_feature_vector(const NodeMetricTable& node,
                                   const GraphMetricPair& pair);

/// Stack per-subject vectors in manifest order, attaching labels. Throws
/// MissingSubjectVector and FeatureNameMismatch. Validates that the dataset
/// is large enough for leave-one-out work (N >= 4, both classes present).
LabeledDataset assemble_dataset(
    const DatasetManifest& manifest,
    const std::map<std::string, FeatureVector>& vectors);

/// CSV with columns subject_id,label,<feature names...>; round-trips exactly.
void write_dataset_csv(const LabeledDataset& ds,
                       const std::filesystem::path& path);
LabeledDataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace fconn
