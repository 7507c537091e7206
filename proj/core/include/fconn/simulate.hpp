// Synthetic two-group BOLD cohorts with known ground-truth connectivity and
// a four-part additive noise mixture: thermal (white Gaussian), scanner drift
// (ramp plus half-period cosine), motion spikes (global, random volumes), and
// physiological oscillations (cardiac + respiratory sinusoids with per-region
// gains). Everything is deterministic from (rng_seed, group, subject_index).
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fconn/ingest.hpp"

namespace fconn {

struct EffectEdge {
  int i = 0;
  int j = 0;
  double delta = 0.0;  // added to group 1's covariance at (i, j)
};

struct SimulationSpec {
  int n_per_group = 0;
  int regions = 0;
  int timepoints = 0;
  double tr_seconds = 2.0;

  // Base covariance: explicit matrix, or block shorthand (contiguous blocks
  // of near-equal size with a common within-block correlation).
  std::optional<Eigen::MatrixXd> base_covariance;
  int n_blocks = 1;
  double within_block_corr = 0.0;

  std::vector<EffectEdge> effect_edges;

  double thermal_sigma = 0.0;
  double drift_amplitude = 0.0;
  double spike_rate = 0.0;      // per-volume probability
  double spike_amplitude = 0.0;
  double cardiac_hz = 0.0;
  double respiratory_hz = 0.0;
  double physio_amplitude = 0.0;

  std::uint64_t rng_seed = 0;

  void validate() const;  // throws SpecInvalid

  /// Normalized key=value dump covering every field; equal specs produce
  /// equal text (used for run-meta hashing).
  std::string canonical_text() const;
};

/// Parse a key=value spec file (comments with `#`; `effect_edge=i,j,delta`
/// may repeat; `covariance_file=<csv>` loads an explicit matrix).
SimulationSpec load_simulation_spec(const std::filesystem::path& path);

/// The group's correlation-scale covariance after applying effect edges
/// (group 1 only) and PSD repair: eigenvalues floored at 1e-10, then rescaled
/// back to a unit diagonal.
Eigen::MatrixXd group_covariance(const SimulationSpec& spec, int group);

/// Noise bookkeeping for ground_truth.json.
struct SubjectNoiseMeta {
  std::string subject_id;
  int group = 0;
  double cardiac_phase = 0.0;
  double respiratory_phase = 0.0;
  double cardiac_alias_hz = 0.0;
  double respiratory_alias_hz = 0.0;
  std::vector<int> spike_volumes;
  std::vector<double> drift_signs;   // per region
  std::vector<double> physio_gains;  // per region
};

RoiTimeSeries generate_subject(const SimulationSpec& spec, int group,
                               int subject_index,
                               SubjectNoiseMeta* meta = nullptr);

struct Cohort {
  std::vector<RoiTimeSeries> subjects;
  DatasetManifest manifest;  // paths filled in by write_cohort
  std::vector<SubjectNoiseMeta> noise_meta;
};

/// 2 * n_per_group subjects, group 0 first.
Cohort generate_cohort(const SimulationSpec& spec);

/// Write one CSV per subject plus manifest.csv and ground_truth.json (group
/// covariances and per-subject noise metadata) into out_dir.
void write_cohort(const Cohort& cohort, const SimulationSpec& spec,
                  const std::filesystem::path& out_dir);

/// Frequency actually observable after sampling at 1/tr: folds f into
/// [0, 1/(2 tr)].
double alias_frequency(double freq_hz, double tr_seconds);

}  // namespace fconn
