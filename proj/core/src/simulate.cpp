#include "fconn/simulate.hpp"

#include <algorithm>
#include <sstream>
#include <cmath>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "fconn/rng.hpp"
#include "text_util.hpp"

namespace fconn {

using json = nlohmann::json;

namespace {

// substream tags for per-subject component generators
enum Stream : std::uint64_t {
  kSignal = 1,
  kThermal = 2,
  kDrift = 3,
  kSpike = 4,
  kPhysio = 5,
};

std::uint64_t subject_seed(const SimulationSpec& spec, int group,
                           int subject_index) {
  return Rng::derive(Rng::derive(spec.rng_seed, static_cast<std::uint64_t>(group)),
                     static_cast<std::uint64_t>(subject_index));
}

Eigen::MatrixXd base_covariance_matrix(const SimulationSpec& spec) {
  const int r = spec.regions;
  if (spec.base_covariance) {
    return *spec.base_covariance;
  }
  // contiguous blocks of near-equal size; within-block correlation constant,
  // across-block zero
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(r, r);
  const int blocks = std::max(1, spec.n_blocks);
  std::vector<int> block_of(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) {
    block_of[static_cast<std::size_t>(j)] =
        static_cast<int>(static_cast<long long>(j) * blocks / r);
  }
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      if (block_of[static_cast<std::size_t>(i)] ==
          block_of[static_cast<std::size_t>(j)]) {
        cov(i, j) = cov(j, i) = spec.within_block_corr;
      }
    }
  }
  return cov;
}

// Floor eigenvalues at 1e-10, then rescale to a unit diagonal.
Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& cov) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::VectorXd values = eig.eigenvalues().cwiseMax(1e-10);
  Eigen::MatrixXd repaired =
      eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::VectorXd scale = repaired.diagonal().cwiseSqrt().cwiseInverse();
  repaired = scale.asDiagonal() * repaired * scale.asDiagonal();
  repaired = 0.5 * (repaired + repaired.transpose());  // keep exactly symmetric
  repaired.diagonal().setOnes();
  return repaired;
}

// Factor A with A A^T = cov via eigendecomposition (handles PSD with zero
// eigenvalues, unlike plain Cholesky).
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal();
}

}  // namespace

double alias_frequency(double freq_hz, double tr_seconds) {
  const double fs = 1.0 / tr_seconds;
  double folded = std::fmod(freq_hz, fs);
  if (folded < 0) folded += fs;
  if (folded > fs / 2.0) folded = fs - folded;
  return folded;
}

void SimulationSpec::validate() const {
  const auto fail = [](const std::string& message) {
    throw Error(ErrorCode::spec_invalid, message);
  };
  if (n_per_group < 1) fail("n_per_group must be >= 1");
  if (regions < 2) fail("regions must be >= 2");
  if (timepoints < 2) fail("timepoints must be >= 2");
  if (!(tr_seconds > 0.0)) fail("tr must be > 0");
  if (n_blocks < 1 || n_blocks > regions) fail("n_blocks must be in [1, regions]");
  if (!(within_block_corr > -1.0 && within_block_corr < 1.0)) {
    fail("within_block_corr must lie in (-1, 1)");
  }
  if (base_covariance &&
      (base_covariance->rows() != regions || base_covariance->cols() != regions)) {
    fail("base_covariance must be regions x regions");
  }
  for (const auto& edge : effect_edges) {
    if (edge.i < 0 || edge.j < 0 || edge.i >= regions || edge.j >= regions ||
        edge.i == edge.j) {
      fail("effect_edge (" + std::to_string(edge.i) + "," +
           std::to_string(edge.j) + ") out of range");
    }
  }
  if (thermal_sigma < 0 || drift_amplitude < 0 || spike_amplitude < 0 ||
      physio_amplitude < 0) {
    fail("noise amplitudes must be >= 0");
  }
  if (spike_rate < 0.0 || spike_rate > 1.0) fail("spike_rate must lie in [0, 1]");
  if (cardiac_hz < 0 || respiratory_hz < 0) fail("frequencies must be >= 0");
}

std::string SimulationSpec::canonical_text() const {
  std::ostringstream out;
  out << "n_per_group=" << n_per_group << '\n'
      << "regions=" << regions << '\n'
      << "timepoints=" << timepoints << '\n'
      << "tr=" << detail::format_double(tr_seconds) << '\n';
  if (base_covariance) {
    out << "covariance=";
    for (Eigen::Index i = 0; i < base_covariance->rows(); ++i) {
      for (Eigen::Index j = 0; j < base_covariance->cols(); ++j) {
        out << detail::format_double((*base_covariance)(i, j)) << ';';
      }
    }
    out << '\n';
  } else {
    out << "n_blocks=" << n_blocks << '\n'
        << "within_block_corr=" << detail::format_double(within_block_corr)
        << '\n';
  }
  for (const auto& edge : effect_edges) {
    out << "effect_edge=" << edge.i << ',' << edge.j << ','
        << detail::format_double(edge.delta) << '\n';
  }
  out << "thermal_sigma=" << detail::format_double(thermal_sigma) << '\n'
      << "drift_amplitude=" << detail::format_double(drift_amplitude) << '\n'
      << "spike_rate=" << detail::format_double(spike_rate) << '\n'
      << "spike_amplitude=" << detail::format_double(spike_amplitude) << '\n'
      << "cardiac_hz=" << detail::format_double(cardiac_hz) << '\n'
      << "respiratory_hz=" << detail::format_double(respiratory_hz) << '\n'
      << "physio_amplitude=" << detail::format_double(physio_amplitude) << '\n'
      << "seed=" << rng_seed << '\n';
  return out.str();
}

SimulationSpec load_simulation_spec(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  SimulationSpec spec;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (const auto& raw : lines) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::spec_invalid,
                  path.string() + " line " + std::to_string(line_no) +
                      ": expected key=value");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key != "effect_edge" && !seen.insert(key).second) {
      throw Error(ErrorCode::spec_invalid,
                  path.string() + ": duplicate key '" + key + "'");
    }

    const auto as_double = [&]() {
      const auto v = detail::parse_double(value);
      if (!v) {
        throw Error(ErrorCode::spec_invalid,
                    path.string() + " line " + std::to_string(line_no) +
                        ": bad number '" + value + "'");
      }
      return *v;
    };
    const auto as_int = [&]() { return static_cast<int>(as_double()); };

    if (key == "n_per_group") spec.n_per_group = as_int();
    else if (key == "regions") spec.regions = as_int();
    else if (key == "timepoints") spec.timepoints = as_int();
    else if (key == "tr") spec.tr_seconds = as_double();
    else if (key == "n_blocks") spec.n_blocks = as_int();
    else if (key == "within_block_corr") spec.within_block_corr = as_double();
    else if (key == "thermal_sigma") spec.thermal_sigma = as_double();
    else if (key == "drift_amplitude") spec.drift_amplitude = as_double();
    else if (key == "spike_rate") spec.spike_rate = as_double();
    else if (key == "spike_amplitude") spec.spike_amplitude = as_double();
    else if (key == "cardiac_hz") spec.cardiac_hz = as_double();
    else if (key == "respiratory_hz") spec.respiratory_hz = as_double();
    else if (key == "physio_amplitude") spec.physio_amplitude = as_double();
    else if (key == "seed") spec.rng_seed = static_cast<std::uint64_t>(as_double());
    else if (key == "effect_edge") {
      const auto parts = detail::split(value, ',');
      if (parts.size() != 3) {
        throw Error(ErrorCode::spec_invalid,
                    path.string() + " line " + std::to_string(line_no) +
                        ": effect_edge wants i,j,delta");
      }
      const auto i = detail::parse_long(parts[0]);
      const auto j = detail::parse_long(parts[1]);
      const auto delta = detail::parse_double(parts[2]);
      if (!i || !j || !delta) {
        throw Error(ErrorCode::spec_invalid,
                    path.string() + " line " + std::to_string(line_no) +
                        ": effect_edge wants i,j,delta");
      }
      spec.effect_edges.push_back(
          {static_cast<int>(*i), static_cast<int>(*j), *delta});
    } else if (key == "covariance_file") {
      const std::filesystem::path file =
          std::filesystem::path(value).is_absolute()
              ? std::filesystem::path(value)
              : path.parent_path() / value;
      const auto rows = detail::read_lines(file);
      std::vector<std::vector<double>> numbers;
      for (const auto& row : rows) {
        if (detail::trim(row).empty()) continue;
        std::vector<double> cells;
        for (const auto& cell : detail::split(row, ',')) {
          const auto v = detail::parse_double(cell);
          if (!v) {
            throw Error(ErrorCode::spec_invalid,
                        file.string() + ": bad covariance entry '" + cell + "'");
          }
          cells.push_back(*v);
        }
        numbers.push_back(std::move(cells));
      }
      const std::size_t r = numbers.size();
      Eigen::MatrixXd cov(r, r);
      for (std::size_t i = 0; i < r; ++i) {
        if (numbers[i].size() != r) {
          throw Error(ErrorCode::spec_invalid,
                      file.string() + ": covariance matrix is not square");
        }
        for (std::size_t j = 0; j < r; ++j) {
          cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              numbers[i][j];
        }
      }
      spec.base_covariance = std::move(cov);
    } else {
      throw Error(ErrorCode::spec_invalid,
                  path.string() + " line " + std::to_string(line_no) +
                      ": unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

Eigen::MatrixXd group_covariance(const SimulationSpec& spec, int group) {
  Eigen::MatrixXd cov = base_covariance_matrix(spec);
  if (group == 1) {
    for (const auto& edge : spec.effect_edges) {
      cov(edge.i, edge.j) += edge.delta;
      cov(edge.j, edge.i) = cov(edge.i, edge.j);
    }
  }
  return psd_repair(cov);
}

RoiTimeSeries generate_subject(const SimulationSpec& spec, int group,
                               int subject_index, SubjectNoiseMeta* meta) {
  spec.validate();
  const int t = spec.timepoints;
  const int r = spec.regions;
  const std::uint64_t seed = subject_seed(spec, group, subject_index);

  RoiTimeSeries ts;
  {
    char id[32];
    std::snprintf(id, sizeof(id), "g%d_s%03d", group, subject_index);
    ts.subject_id = id;
  }
  ts.tr_seconds = spec.tr_seconds;
  ts.region_labels.reserve(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) {
    char label[24];
    std::snprintf(label, sizeof(label), "R%03d", j);
    ts.region_labels.emplace_back(label);
  }

  // correlated signal: each volume is an independent MVN draw
  const Eigen::MatrixXd factor = covariance_factor(group_covariance(spec, group));
  Eigen::MatrixXd data(t, r);
  {
    Rng rng(Rng::derive(seed, kSignal));
    Eigen::VectorXd z(r);
    for (int row = 0; row < t; ++row) {
      for (int j = 0; j < r; ++j) z(j) = rng.gaussian();
      data.row(row) = (factor * z).transpose();
    }
  }

  SubjectNoiseMeta info;
  info.subject_id = ts.subject_id;
  info.group = group;

  // (a) thermal: i.i.d. Gaussian everywhere
  if (spec.thermal_sigma > 0.0) {
    Rng rng(Rng::derive(seed, kThermal));
    for (int row = 0; row < t; ++row) {
      for (int j = 0; j < r; ++j) {
        data(row, j) += spec.thermal_sigma * rng.gaussian();
      }
    }
  }

  // (b) scanner drift: common ramp plus a half-period cosine whose sign
  // varies per region
  {
    Rng rng(Rng::derive(seed, kDrift));
    info.drift_signs.resize(static_cast<std::size_t>(r));
    for (int j = 0; j < r; ++j) {
      info.drift_signs[static_cast<std::size_t>(j)] = rng.sign();
    }
    if (spec.drift_amplitude > 0.0) {
      for (int row = 0; row < t; ++row) {
        const double ramp = double(row) / double(t);
        const double half_cos = std::cos(std::numbers::pi * double(row) / double(t));
        for (int j = 0; j < r; ++j) {
          data(row, j) += spec.drift_amplitude *
                          (ramp + info.drift_signs[static_cast<std::size_t>(j)] *
                                      half_cos);
        }
      }
    }
  }

  // (c) motion spikes: selected volumes get a common +-amplitude shift on
  // every region (head motion displaces all voxels at once)
  {
    Rng rng(Rng::derive(seed, kSpike));
    if (spec.spike_rate > 0.0 && spec.spike_amplitude > 0.0) {
      for (int row = 0; row < t; ++row) {
        if (rng.uniform() < spec.spike_rate) {
          const double shift = spec.spike_amplitude * rng.sign();
          data.row(row).array() += shift;
          info.spike_volumes.push_back(row);
        }
      }
    }
  }

  // (d) physiological: cardiac + respiratory sinusoids with per-subject
  // phases, shared across regions with per-region gains in [0.5, 1.5]
  {
    Rng rng(Rng::derive(seed, kPhysio));
    info.cardiac_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    info.respiratory_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    info.cardiac_alias_hz = alias_frequency(spec.cardiac_hz, spec.tr_seconds);
    info.respiratory_alias_hz =
        alias_frequency(spec.respiratory_hz, spec.tr_seconds);
    info.physio_gains.resize(static_cast<std::size_t>(r));
    for (int j = 0; j < r; ++j) {
      info.physio_gains[static_cast<std::size_t>(j)] = rng.uniform(0.5, 1.5);
    }
    if (spec.physio_amplitude > 0.0) {
      for (int row = 0; row < t; ++row) {
        const double time = double(row) * spec.tr_seconds;
        const double wave =
            std::sin(2.0 * std::numbers::pi * spec.cardiac_hz * time +
                     info.cardiac_phase) +
            std::sin(2.0 * std::numbers::pi * spec.respiratory_hz * time +
                     info.respiratory_phase);
        for (int j = 0; j < r; ++j) {
          data(row, j) += spec.physio_amplitude *
                          info.physio_gains[static_cast<std::size_t>(j)] * wave;
        }
      }
    }
  }

  ts.data = std::move(data);
  if (meta) *meta = std::move(info);
  return ts;
}

Cohort generate_cohort(const SimulationSpec& spec) {
  spec.validate();
  Cohort cohort;
  for (int group = 0; group <= 1; ++group) {
    for (int index = 0; index < spec.n_per_group; ++index) {
      SubjectNoiseMeta meta;
      cohort.subjects.push_back(generate_subject(spec, group, index, &meta));
      cohort.noise_meta.push_back(std::move(meta));
      ManifestEntry entry;
      entry.subject_id = cohort.subjects.back().subject_id;
      entry.label = group;
      entry.path = entry.subject_id + ".csv";
      cohort.manifest.entries.push_back(std::move(entry));
    }
  }
  cohort.manifest.tr_seconds = spec.tr_seconds;
  return cohort;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void write_cohort(const Cohort& cohort, const SimulationSpec& spec,
                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorCode::io_error,
                "cannot create output directory " + out_dir.string());
  }

  DatasetManifest manifest = cohort.manifest;
  for (std::size_t k = 0; k < cohort.subjects.size(); ++k) {
    const auto& ts = cohort.subjects[k];
    const auto file = out_dir / (ts.subject_id + ".csv");
    write_time_series(ts, file);
  }
  write_manifest(manifest, out_dir / "manifest.csv");

  json truth;
  truth["regions"] = spec.regions;
  truth["timepoints"] = spec.timepoints;
  truth["tr_seconds"] = spec.tr_seconds;
  truth["seed"] = spec.rng_seed;
  truth["group0_covariance"] = matrix_to_json(group_covariance(spec, 0));
  truth["group1_covariance"] = matrix_to_json(group_covariance(spec, 1));
  json subjects = json::array();
  for (const auto& meta : cohort.noise_meta) {
    subjects.push_back({{"subject_id", meta.subject_id},
                        {"group", meta.group},
                        {"cardiac_phase", meta.cardiac_phase},
                        {"respiratory_phase", meta.respiratory_phase},
                        {"cardiac_alias_hz", meta.cardiac_alias_hz},
                        {"respiratory_alias_hz", meta.respiratory_alias_hz},
                        {"spike_volumes", meta.spike_volumes},
                        {"drift_signs", meta.drift_signs},
                        {"physio_gains", meta.physio_gains}});
  }
  truth["subjects"] = std::move(subjects);

  auto out = detail::open_for_write(out_dir / "ground_truth.json");
  out << truth.dump(2) << '\n';
}

}  // namespace fconn
