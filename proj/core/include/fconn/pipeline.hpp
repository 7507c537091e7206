// Wiring of the full chain (denoise -> connectivity -> threshold -> graph
// metrics -> features -> classification) behind one batch configuration, plus
// the report files and run metadata the command-line tool emits.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fconn/classify.hpp"
#include "fconn/denoise.hpp"
#include "fconn/features.hpp"
#include "fconn/ingest.hpp"

namespace fconn {

struct ThresholdSpec {
  enum class Mode { tau, density };
  Mode mode = Mode::tau;
  double value = 0.3;  // the tau default is a documented arbitrary choice
};

struct PipelineConfig {
  DenoiseConfig denoise;
  ThresholdSpec threshold;
  ClassifierConfig classifier;
  std::vector<double> fpr_targets = {0.1, 0.15, 0.2, 0.3};

  void validate() const;  // throws SpecInvalid

  /// Normalized key=value dump; equal configs produce equal text. This is
  /// what the run-meta hash covers.
  std::string canonical_text() const;

  /// Parse a key=value config file (same keys as canonical_text; `#`
  /// comments).
  static PipelineConfig load(const std::filesystem::path& path);

  /// Apply one `key=value` override (the CLI accepts config keys as flags).
  void apply_override(const std::string& key, const std::string& value);
};

/// Provenance stamped into every output: enough to reproduce the run.
struct RunMeta {
  std::string artifact_version;
  std::string command;
  std::string config_hash;  // fnv1a-64 of the canonical config text, hex
  std::uint64_t seed = 0;
  std::string classifier;  // effective kind, for classify runs
};

std::string fnv1a64_hex(std::string_view text);
RunMeta make_run_meta(const std::string& command, const PipelineConfig& config);
void write_run_meta(const RunMeta& meta, const std::filesystem::path& path);

/// One subject through denoise -> correlation -> threshold -> metrics.
/// Optionally reports the thresholded graph density and exports the
/// correlation matrix.
FeatureVector subject_features(const RoiTimeSeries& ts,
                               const PipelineConfig& config,
                               double* density_out = nullptr,
                               ConnectivityMatrix* matrix_out = nullptr);

struct ExtractOptions {
  bool keep_going = false;
  int jobs = 1;
  std::optional<std::filesystem::path> save_connectivity;
};

struct ExtractResult {
  LabeledDataset dataset;
  std::vector<std::string> subject_log;  // one density line per subject
  std::vector<std::string> failures;     // keep-going diagnostics
};

/// Run the feature chain for every manifest subject. Without keep_going the
/// first failing subject aborts with its diagnostic; with it, failures are
/// collected and the dataset holds the survivors.
ExtractResult extract_features(const DatasetManifest& manifest,
                               const PipelineConfig& config,
                               const ExtractOptions& options = {});

// ---- report files ----

void write_report_json(const CvReport& report, const RunMeta& meta,
                       const std::filesystem::path& path);

/// Throws MalformedReport (naming the file) when required fields are absent.
CvReport read_report_json(const std::filesystem::path& path,
                          RunMeta* meta = nullptr);

/// Aligned plain-text table: one row per FPR target, one column per report.
std::string format_tpr_table(const std::vector<std::string>& arm_names,
                             const std::vector<CvReport>& reports);

}  // namespace fconn
