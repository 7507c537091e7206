// fconn: batch pipeline from ROI time series to thresholded connectivity
// graphs, graph features, and leave-one-out classification reports.
//
// Subcommands:
//   simulate  generate a synthetic two-group cohort with known connectivity
//   extract   manifest -> denoise -> correlation -> graph -> feature dataset
//   classify  dataset -> LOOCV report (JSON + TPR table)
//   report    side-by-side comparison of one or more reports
//
// Exit codes: 0 success, 1 validation/data error, 2 I/O or environment error.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fconn/classify.hpp"
#include "fconn/error.hpp"
#include "fconn/features.hpp"
#include "fconn/ingest.hpp"
#include "fconn/parallel.hpp"
#include "fconn/pipeline.hpp"
#include "fconn/simulate.hpp"
#include "fconn/version.hpp"

namespace fs = std::filesystem;

namespace {

int exit_code_for(const fconn::Error& error) {
  switch (error.code()) {
    case fconn::ErrorCode::io_error:
    case fconn::ErrorCode::missing_file:
      return 2;
    default:
      return 1;
  }
}

struct CommonOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::vector<std::string> overrides;  // key=value pairs
};

fconn::PipelineConfig resolve_config(const CommonOptions& common) {
  fconn::PipelineConfig config;
  if (common.config_path) {
    config = fconn::PipelineConfig::load(*common.config_path);
  }
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw fconn::Error(fconn::ErrorCode::spec_invalid,
                         "override '" + kv + "' is not key=value");
    }
    config.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (common.seed) config.classifier.rng_seed = *common.seed;
  config.validate();
  return config;
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir,
                 const std::optional<std::uint64_t>& seed, int jobs) {
  auto spec = fconn::load_simulation_spec(spec_path);
  if (seed) spec.rng_seed = *seed;

  // subjects are independent streams; generate in parallel, write in order
  fconn::Cohort cohort;
  const std::size_t total = static_cast<std::size_t>(2 * spec.n_per_group);
  cohort.subjects.resize(total);
  cohort.noise_meta.resize(total);
  const auto group_of = [&](std::size_t k) {
    return k < static_cast<std::size_t>(spec.n_per_group) ? 0 : 1;
  };
  fconn::parallel_for(total, jobs, [&](std::size_t k) {
    const int group = group_of(k);
    const int index = static_cast<int>(
        group == 0 ? k : k - static_cast<std::size_t>(spec.n_per_group));
    cohort.subjects[k] =
        fconn::generate_subject(spec, group, index, &cohort.noise_meta[k]);
  });
  for (std::size_t k = 0; k < total; ++k) {
    fconn::ManifestEntry entry;
    entry.subject_id = cohort.subjects[k].subject_id;
    entry.label = group_of(k);
    entry.path = entry.subject_id + ".csv";
    cohort.manifest.entries.push_back(std::move(entry));
  }
  cohort.manifest.tr_seconds = spec.tr_seconds;

  fconn::write_cohort(cohort, spec, out_dir);

  fconn::RunMeta meta;
  meta.artifact_version = std::string(fconn::kVersion);
  meta.command = "simulate";
  meta.config_hash = fconn::fnv1a64_hex(spec.canonical_text());
  meta.seed = spec.rng_seed;
  fconn::write_run_meta(meta, fs::path(out_dir) / "run_meta.json");

  std::cout << "wrote " << cohort.subjects.size() << " subjects (" << spec.regions
            << " regions x " << spec.timepoints << " volumes) to " << out_dir
            << "\n";
  return 0;
}

int cmd_extract(const std::string& manifest_path, const CommonOptions& common,
                const std::string& out_path, bool keep_going,
                const std::optional<std::string>& save_connectivity) {
  const auto config = resolve_config(common);
  const auto manifest = fconn::load_manifest(manifest_path);

  fconn::ExtractOptions options;
  options.keep_going = keep_going;
  options.jobs = common.jobs;
  if (save_connectivity) {
    options.save_connectivity = fs::path(*save_connectivity);
    std::error_code ec;
    fs::create_directories(*options.save_connectivity, ec);
  }

  const auto result = fconn::extract_features(manifest, config, options);
  for (const auto& line : result.subject_log) std::cerr << line << '\n';
  for (const auto& failure : result.failures) {
    std::cerr << "skipped " << failure << '\n';
  }

  fconn::write_dataset_csv(result.dataset, out_path);
  fconn::write_run_meta(fconn::make_run_meta("extract", config),
                        out_path + ".run_meta.json");
  std::cout << "wrote dataset " << out_path << " (" << result.dataset.subjects()
            << " subjects x " << result.dataset.features() << " features)\n";
  return 0;
}

int cmd_classify(const std::string& dataset_path, const CommonOptions& common,
                 const std::string& report_path) {
  const auto config = resolve_config(common);
  const auto dataset = fconn::read_dataset_csv(dataset_path);
  const auto report = fconn::loocv(dataset, config.classifier,
                                   config.fpr_targets, common.jobs);
  const auto meta = fconn::make_run_meta("classify", config);
  fconn::write_report_json(report, meta, report_path);

  std::cout << fconn::format_tpr_table(
      {std::string(fconn::classifier_kind_name(config.classifier.kind))},
      {report});
  std::cout << "wrote report " << report_path << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& report_paths) {
  std::vector<std::string> names;
  std::vector<fconn::CvReport> reports;
  for (const auto& path : report_paths) {
    fconn::RunMeta meta;
    reports.push_back(fconn::read_report_json(path, &meta));
    std::string name = fs::path(path).stem().string();
    if (!meta.classifier.empty()) name += " (" + meta.classifier + ")";
    names.push_back(std::move(name));
  }
  std::cout << fconn::format_tpr_table(names, reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fconn: functional-connectivity graph features and "
               "leave-one-out classification"};
  app.set_version_flag("--version", std::string(fconn::kVersion));
  app.require_subcommand(1);

  CommonOptions common;

  // simulate
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic cohort");
  std::string spec_path, out_dir;
  std::optional<std::uint64_t> sim_seed;
  simulate->add_option("--spec", spec_path, "simulation spec (key=value file)")
      ->required();
  simulate->add_option("--out", out_dir, "output directory")->required();
  simulate->add_option("--seed", sim_seed, "override the spec's seed");
  simulate->add_option("--jobs", common.jobs, "parallel subject generation");

  // extract
  auto* extract = app.add_subcommand(
      "extract", "compute graph features for every manifest subject");
  std::string manifest_path, dataset_out;
  bool keep_going = false;
  std::optional<std::string> save_connectivity;
  extract->add_option("--manifest", manifest_path, "cohort manifest")->required();
  extract->add_option("--out", dataset_out, "output dataset CSV")->required();
  extract->add_option("--config", common.config_path, "pipeline config file");
  extract->add_option("--set", common.overrides,
                      "config override key=value (repeatable)");
  std::optional<std::string> flag_detrend, flag_bandpass, flag_global,
      flag_threshold;
  extract->add_option("--detrend-order", flag_detrend,
                      "polynomial detrend order, or 'none'");
  extract->add_option("--bandpass", flag_bandpass,
                      "band as low,high in Hz, or 'none'");
  extract->add_option("--global-signal", flag_global,
                      "regress out the global signal (true|false)");
  extract->add_option("--threshold", flag_threshold,
                      "graph threshold, tau:<v> or density:<v>");
  extract->add_flag("--keep-going", keep_going,
                    "skip failing subjects instead of aborting");
  extract->add_option("--save-connectivity", save_connectivity,
                      "directory for per-subject correlation matrices");
  extract->add_option("--jobs", common.jobs, "parallel subjects");
  extract->add_option("--seed", common.seed, "override classifier seed");

  // classify
  auto* classify =
      app.add_subcommand("classify", "leave-one-out cross-validation report");
  std::string dataset_path, report_path;
  std::optional<std::string> classifier_name;
  classify->add_option("--dataset", dataset_path, "feature dataset CSV")
      ->required();
  classify->add_option("--report", report_path, "output report JSON")->required();
  classify->add_option("--config", common.config_path, "pipeline config file");
  classify->add_option("--set", common.overrides,
                       "config override key=value (repeatable)");
  classify->add_option("--classifier", classifier_name,
                       "logistic_regression | linear_svm | random_forest");
  classify->add_option("--seed", common.seed, "override the rng seed");
  classify->add_option("--jobs", common.jobs, "parallel folds");

  // report
  auto* report = app.add_subcommand("report", "compare one or more reports");
  std::vector<std::string> report_paths;
  report->add_option("reports", report_paths, "report JSON files")
      ->required()
      ->expected(-1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return cmd_simulate(spec_path, out_dir, sim_seed, common.jobs);
    }
    if (extract->parsed()) {
      if (flag_detrend) common.overrides.push_back("detrend_order=" + *flag_detrend);
      if (flag_bandpass) common.overrides.push_back("bandpass=" + *flag_bandpass);
      if (flag_global) common.overrides.push_back("global_signal=" + *flag_global);
      if (flag_threshold) common.overrides.push_back("threshold=" + *flag_threshold);
      return cmd_extract(manifest_path, common, dataset_out, keep_going,
                         save_connectivity);
    }
    if (classify->parsed()) {
      if (classifier_name) {
        common.overrides.push_back("classifier=" + *classifier_name);
      }
      return cmd_classify(dataset_path, common, report_path);
    }
    if (report->parsed()) {
      return cmd_report(report_paths);
    }
  } catch (const fconn::Error& error) {
    std::cerr << "error: " << error.what() << '\n';
    return exit_code_for(error);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 1;
  }
  return 0;
}
