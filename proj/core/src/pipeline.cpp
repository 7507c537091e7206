#include "fconn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fconn/connectivity.hpp"
#include "fconn/graph_metrics.hpp"
#include "fconn/parallel.hpp"
#include "fconn/version.hpp"
#include "text_util.hpp"

namespace fconn {

using json = nlohmann::json;

void PipelineConfig::validate() const {
  if (threshold.mode == ThresholdSpec::Mode::tau) {
    if (!(threshold.value > -1.0 && threshold.value < 1.0)) {
      throw Error(ErrorCode::tau_out_of_range, "threshold tau must lie in (-1, 1)");
    }
  } else if (!(threshold.value > 0.0 && threshold.value <= 1.0)) {
    throw Error(ErrorCode::density_out_of_range,
                "threshold density must lie in (0, 1]");
  }
  if (denoise.detrend_order && *denoise.detrend_order < 0) {
    throw Error(ErrorCode::spec_invalid, "detrend_order must be >= 0");
  }
  if (denoise.bandpass_hz &&
      !(denoise.bandpass_hz->low_hz >= 0.0 &&
        denoise.bandpass_hz->low_hz < denoise.bandpass_hz->high_hz)) {
    throw Error(ErrorCode::band_out_of_range,
                "bandpass must satisfy 0 <= low < high");
  }
  if (classifier.l2_lambda < 0.0 || classifier.epochs < 1 ||
      !(classifier.learning_rate > 0.0) || classifier.trees < 1 ||
      classifier.max_depth < 0 || classifier.features_per_split < 0) {
    throw Error(ErrorCode::spec_invalid, "bad classifier parameters");
  }
  if (!std::is_sorted(fpr_targets.begin(), fpr_targets.end())) {
    throw Error(ErrorCode::spec_invalid, "fpr_targets must be sorted ascending");
  }
  for (const double target : fpr_targets) {
    if (target < 0.0 || target > 1.0) {
      throw Error(ErrorCode::spec_invalid, "fpr_targets must lie in [0, 1]");
    }
  }
}

std::string PipelineConfig::canonical_text() const {
  std::ostringstream out;
  out << "detrend_order="
      << (denoise.detrend_order ? std::to_string(*denoise.detrend_order)
                                : std::string("none"))
      << '\n';
  out << "bandpass=";
  if (denoise.bandpass_hz) {
    out << detail::format_double(denoise.bandpass_hz->low_hz) << ','
        << detail::format_double(denoise.bandpass_hz->high_hz);
  } else {
    out << "none";
  }
  out << '\n';
  out << "global_signal=" << (denoise.regress_global_signal ? "true" : "false")
      << '\n';
  out << "threshold="
      << (threshold.mode == ThresholdSpec::Mode::tau ? "tau" : "density") << ':'
      << detail::format_double(threshold.value) << '\n';
  out << "classifier=" << classifier_kind_name(classifier.kind) << '\n';
  out << "l2_lambda=" << detail::format_double(classifier.l2_lambda) << '\n';
  out << "epochs=" << classifier.epochs << '\n';
  out << "learning_rate=" << detail::format_double(classifier.learning_rate)
      << '\n';
  out << "trees=" << classifier.trees << '\n';
  out << "max_depth="
      << (classifier.max_depth > 0 ? std::to_string(classifier.max_depth)
                                   : std::string("none"))
      << '\n';
  out << "features_per_split="
      << (classifier.features_per_split > 0
              ? std::to_string(classifier.features_per_split)
              : std::string("sqrt"))
      << '\n';
  out << "seed=" << classifier.rng_seed << '\n';
  out << "fpr_targets=";
  for (std::size_t k = 0; k < fpr_targets.size(); ++k) {
    if (k) out << ',';
    out << detail::format_double(fpr_targets[k]);
  }
  out << '\n';
  return out.str();
}

void PipelineConfig::apply_override(const std::string& key,
                                    const std::string& value) {
  const auto bad = [&](const std::string& why) {
    throw Error(ErrorCode::spec_invalid, "config key '" + key + "': " + why);
  };
  const auto as_double = [&]() {
    const auto v = detail::parse_double(value);
    if (!v) bad("bad number '" + value + "'");
    return *v;
  };
  const auto as_int = [&]() {
    const auto v = detail::parse_long(value);
    if (!v) bad("bad integer '" + value + "'");
    return static_cast<int>(*v);
  };

  if (key == "detrend_order") {
    if (value == "none") {
      denoise.detrend_order.reset();
    } else {
      denoise.detrend_order = as_int();
    }
  } else if (key == "bandpass") {
    if (value == "none") {
      denoise.bandpass_hz.reset();
    } else {
      const auto parts = detail::split(value, ',');
      if (parts.size() != 2) bad("want low,high");
      const auto low = detail::parse_double(parts[0]);
      const auto high = detail::parse_double(parts[1]);
      if (!low || !high) bad("want low,high");
      denoise.bandpass_hz = BandpassBand{*low, *high};
    }
  } else if (key == "global_signal") {
    if (value == "true") denoise.regress_global_signal = true;
    else if (value == "false") denoise.regress_global_signal = false;
    else bad("want true or false");
  } else if (key == "threshold") {
    const auto colon = value.find(':');
    if (colon == std::string::npos) bad("want tau:<v> or density:<v>");
    const std::string mode = value.substr(0, colon);
    const auto v = detail::parse_double(value.substr(colon + 1));
    if (!v) bad("bad threshold value");
    if (mode == "tau") threshold.mode = ThresholdSpec::Mode::tau;
    else if (mode == "density") threshold.mode = ThresholdSpec::Mode::density;
    else bad("mode must be tau or density");
    threshold.value = *v;
  } else if (key == "classifier") {
    classifier.kind = classifier_kind_from_name(value);
  } else if (key == "l2_lambda") {
    classifier.l2_lambda = as_double();
  } else if (key == "epochs") {
    classifier.epochs = as_int();
  } else if (key == "learning_rate") {
    classifier.learning_rate = as_double();
  } else if (key == "trees") {
    classifier.trees = as_int();
  } else if (key == "max_depth") {
    classifier.max_depth = value == "none" ? 0 : as_int();
  } else if (key == "features_per_split") {
    classifier.features_per_split = value == "sqrt" ? 0 : as_int();
  } else if (key == "seed") {
    const auto v = detail::parse_long(value);
    if (!v || *v < 0) bad("bad seed");
    classifier.rng_seed = static_cast<std::uint64_t>(*v);
  } else if (key == "fpr_targets") {
    std::vector<double> targets;
    for (const auto& cell : detail::split(value, ',')) {
      const auto v = detail::parse_double(cell);
      if (!v) bad("bad fpr list");
      targets.push_back(*v);
    }
    fpr_targets = std::move(targets);
  } else {
    bad("unknown key");
  }
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  PipelineConfig config;
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
    config.apply_override(std::string(detail::trim(line.substr(0, eq))),
                          std::string(detail::trim(line.substr(eq + 1))));
  }
  config.validate();
  return config;
}

std::string fnv1a64_hex(std::string_view text) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

RunMeta make_run_meta(const std::string& command, const PipelineConfig& config) {
  RunMeta meta;
  meta.artifact_version = std::string(kVersion);
  meta.command = command;
  meta.config_hash = fnv1a64_hex(config.canonical_text());
  meta.seed = config.classifier.rng_seed;
  meta.classifier = std::string(classifier_kind_name(config.classifier.kind));
  return meta;
}

namespace {

json run_meta_to_json(const RunMeta& meta) {
  return {{"artifact_version", meta.artifact_version},
          {"command", meta.command},
          {"config_hash", meta.config_hash},
          {"seed", meta.seed},
          {"classifier", meta.classifier}};
}

}  // namespace

void write_run_meta(const RunMeta& meta, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << run_meta_to_json(meta).dump(2) << '\n';
}

namespace {

// Error::what() carries the code-name prefix; strip it before re-wrapping so
// subject attribution does not duplicate it.
std::string error_detail(const Error& error) {
  const std::string_view name = error_code_name(error.code());
  const std::string_view what = error.what();
  if (what.size() > name.size() + 2 && what.substr(0, name.size()) == name &&
      what.substr(name.size(), 2) == ": ") {
    return std::string(what.substr(name.size() + 2));
  }
  return std::string(what);
}

}  // namespace

FeatureVector subject_features(const RoiTimeSeries& ts,
                               const PipelineConfig& config, double* density_out,
                               ConnectivityMatrix* matrix_out) {
  const RoiTimeSeries cleaned = run_denoise(ts, config.denoise);
  const ConnectivityMatrix cm = pearson_matrix(cleaned);
  const BinaryGraph graph =
      config.threshold.mode == ThresholdSpec::Mode::tau
          ? threshold_graph(cm, config.threshold.value)
          : density_threshold(cm, config.threshold.value);
  if (density_out) *density_out = graph.density();
  if (matrix_out) *matrix_out = cm;
  return build_feature_vector(node_metrics(graph), efficiency_metrics(graph));
}

ExtractResult extract_features(const DatasetManifest& manifest,
                               const PipelineConfig& config,
                               const ExtractOptions& options) {
  config.validate();
  const std::size_t n = manifest.entries.size();

  struct SubjectOutcome {
    bool ok = false;
    FeatureVector features;
    double density = 0.0;
    ErrorCode code = ErrorCode::spec_invalid;
    std::string error;
  };
  std::vector<SubjectOutcome> outcomes(n);

  // load everything first so cohort-level validation sees all subjects
  std::vector<RoiTimeSeries> series(n);
  parallel_for(n, options.jobs, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    try {
      series[i] = load_time_series(entry.path, manifest.tr_seconds);
      series[i].subject_id = entry.subject_id;
      outcomes[i].ok = true;
    } catch (const Error& error) {
      outcomes[i].code = error.code();
      outcomes[i].error = error_detail(error);
    }
  });

  if (!options.keep_going) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!outcomes[i].ok) {
        throw Error(outcomes[i].code, "subject '" +
                                          manifest.entries[i].subject_id +
                                          "': " + outcomes[i].error);
      }
    }
  }
  std::vector<RoiTimeSeries> loaded;
  for (std::size_t i = 0; i < n; ++i) {
    if (outcomes[i].ok) loaded.push_back(series[i]);
  }
  if (!loaded.empty()) check_cohort(loaded);

  parallel_for(n, options.jobs, [&](std::size_t i) {
    if (!outcomes[i].ok) return;
    try {
      ConnectivityMatrix cm;
      outcomes[i].features = subject_features(
          series[i], config, &outcomes[i].density,
          options.save_connectivity ? &cm : nullptr);
      if (options.save_connectivity) {
        write_connectivity_csv(
            cm, *options.save_connectivity /
                    (manifest.entries[i].subject_id + "_connectivity.csv"));
      }
    } catch (const Error& error) {
      outcomes[i].ok = false;
      outcomes[i].code = error.code();
      outcomes[i].error = error_detail(error);
    }
  });

  ExtractResult result;
  std::map<std::string, FeatureVector> vectors;
  DatasetManifest survivors;
  survivors.label_names = manifest.label_names;
  survivors.tr_seconds = manifest.tr_seconds;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& entry = manifest.entries[i];
    if (!outcomes[i].ok) {
      const std::string message = "subject '" + entry.subject_id +
                                  "': " + outcomes[i].error;
      if (!options.keep_going) {
        throw Error(outcomes[i].code, message);
      }
      result.failures.push_back(message);
      continue;
    }
    std::ostringstream line;
    line << "subject=" << entry.subject_id << " density=" << std::fixed
         << std::setprecision(4) << outcomes[i].density;
    result.subject_log.push_back(line.str());
    vectors.emplace(entry.subject_id, std::move(outcomes[i].features));
    survivors.entries.push_back(entry);
  }
  result.dataset = assemble_dataset(survivors, vectors);
  return result;
}

void write_report_json(const CvReport& report, const RunMeta& meta,
                       const std::filesystem::path& path) {
  json doc;
  doc["run_meta"] = run_meta_to_json(meta);
  doc["accuracy"] = report.accuracy;
  doc["accuracy_dispersion"] = report.accuracy_dispersion;
  json per_subject = json::array();
  for (const auto& row : report.per_subject) {
    per_subject.push_back({{"subject_id", row.subject_id},
                           {"true_label", row.true_label},
                           {"score", row.score},
                           {"predicted", row.predicted}});
  }
  doc["per_subject"] = std::move(per_subject);
  json roc = json::array();
  for (const auto& point : report.roc) {
    roc.push_back({{"fpr", point.fpr}, {"tpr", point.tpr}});
  }
  doc["roc"] = std::move(roc);
  json table = json::array();
  for (const auto& [fpr, tpr] : report.tpr_at_fpr) {
    table.push_back({{"fpr", fpr}, {"tpr", tpr}});
  }
  doc["tpr_at_fpr"] = std::move(table);

  auto out = detail::open_for_write(path);
  out << doc.dump(2) << '\n';
}

CvReport read_report_json(const std::filesystem::path& path, RunMeta* meta) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::malformed_report, "cannot open " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& error) {
    throw Error(ErrorCode::malformed_report,
                path.string() + ": " + error.what());
  }
  const auto require = [&](const char* field) -> const json& {
    if (!doc.contains(field)) {
      throw Error(ErrorCode::malformed_report,
                  path.string() + ": missing field '" + field + "'");
    }
    return doc.at(field);
  };

  CvReport report;
  try {
    report.accuracy = require("accuracy").get<double>();
    report.accuracy_dispersion = require("accuracy_dispersion").get<double>();
    for (const auto& row : require("per_subject")) {
      report.per_subject.push_back({row.at("subject_id").get<std::string>(),
                                    row.at("true_label").get<int>(),
                                    row.at("score").get<double>(),
                                    row.at("predicted").get<int>()});
    }
    for (const auto& point : require("roc")) {
      report.roc.push_back(
          {point.at("fpr").get<double>(), point.at("tpr").get<double>()});
    }
    for (const auto& cell : require("tpr_at_fpr")) {
      report.tpr_at_fpr[cell.at("fpr").get<double>()] =
          cell.at("tpr").get<double>();
    }
    if (meta && doc.contains("run_meta")) {
      const auto& m = doc.at("run_meta");
      meta->artifact_version = m.value("artifact_version", "");
      meta->command = m.value("command", "");
      meta->config_hash = m.value("config_hash", "");
      meta->seed = m.value("seed", std::uint64_t{0});
      meta->classifier = m.value("classifier", "");
    }
  } catch (const json::exception& error) {
    throw Error(ErrorCode::malformed_report,
                path.string() + ": " + error.what());
  }
  return report;
}

std::string format_tpr_table(const std::vector<std::string>& arm_names,
                             const std::vector<CvReport>& reports) {
  // union of FPR targets across reports, ascending
  std::vector<double> targets;
  for (const auto& report : reports) {
    for (const auto& [fpr, tpr] : report.tpr_at_fpr) targets.push_back(fpr);
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  const auto fmt = [](double value) {
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(2) << value;
    return cell.str();
  };

  std::vector<std::size_t> widths;
  std::ostringstream out;
  out << std::left << std::setw(20) << "False Positive Rate";
  for (const auto& name : arm_names) {
    widths.push_back(std::max<std::size_t>(name.size() + 2, 12));
    out << std::setw(static_cast<int>(widths.back())) << name;
  }
  out << '\n';
  for (const double target : targets) {
    out << std::left << std::setw(20) << fmt(target);
    for (std::size_t a = 0; a < reports.size(); ++a) {
      const auto it = reports[a].tpr_at_fpr.find(target);
      out << std::setw(static_cast<int>(widths[a]))
          << (it == reports[a].tpr_at_fpr.end() ? std::string("-")
                                                : fmt(it->second));
    }
    out << '\n';
  }
  out << std::left << std::setw(20) << "accuracy";
  for (std::size_t a = 0; a < reports.size(); ++a) {
    std::ostringstream cell;
    cell << fmt(reports[a].accuracy) << " +- "
         << fmt(reports[a].accuracy_dispersion);
    out << std::setw(static_cast<int>(widths[a])) << cell.str();
  }
  out << '\n';
  return out.str();
}

}  // namespace fconn
