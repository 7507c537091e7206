#include <doctest.h>

#include "fconn/pipeline.hpp"
#include "fconn/simulate.hpp"
#include "test_helpers.hpp"

using namespace fconn;
using testutil::TempDir;

namespace {

SimulationSpec small_spec(std::uint64_t seed) {
  SimulationSpec spec;
  spec.n_per_group = 3;
  spec.regions = 6;
  spec.timepoints = 60;
  spec.n_blocks = 2;
  spec.within_block_corr = 0.6;
  spec.thermal_sigma = 0.3;
  spec.rng_seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("pipeline config parses, validates, and hashes canonically") {
  TempDir dir("cfg");
  testutil::write_text(dir.file("p.cfg"),
                       "# pipeline\ndetrend_order=1\nbandpass=0.01,0.1\n"
                       "global_signal=true\nthreshold=tau:0.45\n"
                       "classifier=linear_svm\nepochs=250\nseed=12\n"
                       "fpr_targets=0.1,0.15,0.2,0.3\n");
  const auto config = PipelineConfig::load(dir.file("p.cfg"));
  CHECK(config.denoise.detrend_order == 1);
  REQUIRE(config.denoise.bandpass_hz.has_value());
  CHECK(config.denoise.bandpass_hz->high_hz == 0.1);
  CHECK(config.denoise.regress_global_signal);
  CHECK(config.threshold.mode == ThresholdSpec::Mode::tau);
  CHECK(config.classifier.kind == ClassifierKind::linear_svm);
  CHECK(config.classifier.rng_seed == 12);

  // canonical text is stable across construction routes
  PipelineConfig direct;
  direct.denoise.detrend_order = 1;
  direct.denoise.bandpass_hz = BandpassBand{0.01, 0.1};
  direct.denoise.regress_global_signal = true;
  direct.threshold = {ThresholdSpec::Mode::tau, 0.45};
  direct.classifier.kind = ClassifierKind::linear_svm;
  direct.classifier.epochs = 250;
  direct.classifier.rng_seed = 12;
  CHECK(direct.canonical_text() == config.canonical_text());
  CHECK(fnv1a64_hex(direct.canonical_text()) ==
        fnv1a64_hex(config.canonical_text()));

  SUBCASE("unsorted fpr targets are rejected") {
    auto bad = config;
    bad.fpr_targets = {0.3, 0.1};
    CHECK_THROWS_AS(bad.validate(), Error);
  }
  SUBCASE("unknown keys are rejected") {
    auto bad = config;
    CHECK_THROWS_AS(bad.apply_override("nonsense", "1"), Error);
  }
}

TEST_CASE("extract produces ordered logs and a labeled dataset") {
  TempDir dir("extract");
  const auto spec = small_spec(21);
  const auto cohort = generate_cohort(spec);
  write_cohort(cohort, spec, dir.file("cohort"));
  const auto manifest = load_manifest(dir.file("cohort") / "manifest.csv");

  PipelineConfig config;
  config.denoise.detrend_order = 1;
  const auto result = extract_features(manifest, config);
  CHECK(result.dataset.subjects() == 6);
  CHECK(result.dataset.features() == 5 * 6 + 2);
  REQUIRE(result.subject_log.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(result.subject_log[k].find(manifest.entries[k].subject_id) !=
          std::string::npos);
    CHECK(result.subject_log[k].find("density=") != std::string::npos);
  }

  SUBCASE("jobs do not change the dataset") {
    ExtractOptions quad;
    quad.jobs = 4;
    const auto rerun = extract_features(manifest, config, quad);
    CHECK((rerun.dataset.matrix - result.dataset.matrix).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(rerun.subject_log == result.subject_log);
  }
}

TEST_CASE("keep-going collects failures and keeps survivors") {
  TempDir dir("keepgoing");
  const auto spec = small_spec(22);
  const auto cohort = generate_cohort(spec);
  write_cohort(cohort, spec, dir.file("cohort"));
  // sabotage one subject with a constant region
  testutil::write_text(dir.file("cohort") / "g0_s001.csv",
                       "R000,R001,R002,R003,R004,R005\n"
                       "1,2,3,4,5,1\n2,3,4,5,6,1\n3,1,2,4,2,1\n");
  const auto manifest = load_manifest(dir.file("cohort") / "manifest.csv");

  PipelineConfig config;
  SUBCASE("default aborts naming the subject") {
    try {
      extract_features(manifest, config);
      FAIL("expected failure");
    } catch (const Error& error) {
      CHECK(std::string(error.what()).find("g0_s001") != std::string::npos);
    }
  }
  SUBCASE("keep-going yields the other five subjects") {
    ExtractOptions options;
    options.keep_going = true;
    const auto result = extract_features(manifest, config, options);
    CHECK(result.dataset.subjects() == 5);
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures.front().find("g0_s001") != std::string::npos);
  }
}

TEST_CASE("report files round-trip through JSON") {
  TempDir dir("report");
  const auto spec = small_spec(23);
  const auto cohort = generate_cohort(spec);
  write_cohort(cohort, spec, dir.file("cohort"));
  const auto manifest = load_manifest(dir.file("cohort") / "manifest.csv");
  PipelineConfig config;
  config.classifier.epochs = 60;
  const auto extract = extract_features(manifest, config);
  const auto report =
      loocv(extract.dataset, config.classifier, config.fpr_targets);

  const auto meta = make_run_meta("classify", config);
  write_report_json(report, meta, dir.file("r.json"));
  RunMeta meta_back;
  const auto back = read_report_json(dir.file("r.json"), &meta_back);
  CHECK(back.accuracy == report.accuracy);
  CHECK(back.accuracy_dispersion == report.accuracy_dispersion);
  CHECK(back.per_subject.size() == report.per_subject.size());
  CHECK(back.roc.size() == report.roc.size());
  CHECK(back.tpr_at_fpr == report.tpr_at_fpr);
  CHECK(meta_back.config_hash == meta.config_hash);
  CHECK(meta_back.artifact_version == meta.artifact_version);

  SUBCASE("format_tpr_table renders every arm") {
    const auto table = format_tpr_table({"armA", "armB"}, {report, report});
    CHECK(table.find("armA") != std::string::npos);
    CHECK(table.find("armB") != std::string::npos);
    CHECK(table.find("0.10") != std::string::npos);
    CHECK(table.find("accuracy") != std::string::npos);
  }
}

TEST_CASE("subject_features exposes density and the correlation matrix") {
  const auto spec = small_spec(24);
  const auto ts = generate_subject(spec, 0, 0);
  PipelineConfig config;
  config.threshold = {ThresholdSpec::Mode::density, 0.4};
  double density = -1.0;
  ConnectivityMatrix cm;
  const auto fv = subject_features(ts, config, &density, &cm);
  CHECK(fv.values.size() == 32);
  CHECK(density == doctest::Approx(0.4).epsilon(0.15));  // ceil rounding
  CHECK(cm.size() == 6);
}
