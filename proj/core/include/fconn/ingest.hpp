// Loading and validation of per-subject ROI time series and the dataset
// manifest. The pipeline starts here: one CSV per subject (header row of
// region labels, one row per volume) plus a manifest listing subject, group
// label, and file path.
#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fconn/error.hpp"

namespace fconn {

/// One subject's BOLD samples over R labeled regions; data is T x R with
/// column j belonging to region_labels[j]. Region order is contractual: it
/// fixes feature order downstream.
struct RoiTimeSeries {
  std::string subject_id;
  std::vector<std::string> region_labels;
  Eigen::MatrixXd data;  // T x R
  double tr_seconds = 2.0;

  std::size_t timepoints() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t regions() const { return static_cast<std::size_t>(data.cols()); }
};

struct ManifestEntry {
  std::string subject_id;
  int label = 0;  // 0 or 1
  std::filesystem::path path;
};

/// Group membership for a two-class cohort. tr_seconds applies to every
/// subject (scanner-level constant); label_names give the two groups
/// human-readable names.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::map<int, std::string> label_names = {{0, "group0"}, {1, "group1"}};
  double tr_seconds = 2.0;
};

struct CohortSummary {
  std::size_t regions = 0;
  std::size_t t_min = 0;
  std::size_t t_max = 0;
  std::size_t subjects = 0;
};

/// Parse a time-series CSV. First row is the header of region labels; every
/// data row must have exactly as many numeric cells. Throws MissingFile,
/// RaggedRows, NonNumericCell, DuplicateRegionLabel, TooFewRows.
RoiTimeSeries load_time_series(const std::filesystem::path& path,
                               double tr_seconds = 2.0);

/// Inverse of load_time_series: full-precision CSV that round-trips exactly.
void write_time_series(const RoiTimeSeries& ts, const std::filesystem::path& path);

/// Parse a manifest: `subject_id,label,path` per line, `#` comments, optional
/// directives `tr=<seconds>`, `label0=<name>`, `label1=<name>`. Paths are
/// resolved relative to the manifest's directory. Throws DuplicateSubject,
/// UnknownLabel, ClassUnderpopulated.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Write a manifest in the format load_manifest reads. Paths are written as
/// given (callers pass paths relative to the manifest's directory).
void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path);

/// Verify all subjects share region labels (order-sensitive) and tr; returns
/// the cohort shape. Throws RegionMismatch, TrMismatch.
CohortSummary check_cohort(std::span<const RoiTimeSeries> series);

}  // namespace fconn
