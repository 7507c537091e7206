// End-to-end stage costs on a synthetic atlas-sized subject.
#include <benchmark/benchmark.h>

#include "fconn/connectivity.hpp"
#include "fconn/denoise.hpp"
#include "fconn/pipeline.hpp"
#include "fconn/simulate.hpp"

namespace {

fconn::RoiTimeSeries atlas_subject(int regions, int timepoints) {
  fconn::SimulationSpec spec;
  spec.n_per_group = 1;
  spec.regions = regions;
  spec.timepoints = timepoints;
  spec.n_blocks = 6;
  spec.within_block_corr = 0.5;
  spec.thermal_sigma = 0.4;
  spec.drift_amplitude = 1.0;
  spec.cardiac_hz = 1.2;
  spec.respiratory_hz = 0.15;
  spec.physio_amplitude = 0.8;
  spec.rng_seed = 1;
  return fconn::generate_subject(spec, 0, 0);
}

void BM_pearson(benchmark::State& state) {
  const auto ts = atlas_subject(117, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fconn::pearson_matrix(ts));
  }
}
BENCHMARK(BM_pearson)->Arg(150)->Arg(300);

void BM_bandpass(benchmark::State& state) {
  const auto ts = atlas_subject(117, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fconn::bandpass(ts, 0.01, 0.1));
  }
}
BENCHMARK(BM_bandpass)->Arg(150)->Arg(300);

void BM_subject_features(benchmark::State& state) {
  const auto ts = atlas_subject(117, 300);
  fconn::PipelineConfig config;
  config.denoise.detrend_order = 1;
  config.denoise.bandpass_hz = fconn::BandpassBand{0.01, 0.1};
  config.denoise.regress_global_signal = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fconn::subject_features(ts, config));
  }
}
BENCHMARK(BM_subject_features);

void BM_generate_subject(benchmark::State& state) {
  fconn::SimulationSpec spec;
  spec.n_per_group = 1;
  spec.regions = 117;
  spec.timepoints = 300;
  spec.n_blocks = 6;
  spec.within_block_corr = 0.5;
  spec.thermal_sigma = 0.4;
  spec.rng_seed = 2;
  int index = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fconn::generate_subject(spec, 0, index++ % 8));
  }
}
BENCHMARK(BM_generate_subject);

}  // namespace
