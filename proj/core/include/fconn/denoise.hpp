// Per-subject temporal cleaning: polynomial detrend, spectral band-pass, and
// nuisance regression with optional global-signal regression. Stages run in a
// fixed order (detrend -> band-pass -> nuisance regression); every stage is a
// linear operator applied independently per region column.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "fconn/ingest.hpp"

namespace fconn {

/// Nuisance design columns to regress out of every region. Must match the
/// subject's T; an intercept is always appended internally.
struct NuisanceSet {
  std::vector<std::string> names;
  Eigen::MatrixXd regressors;  // T x K
};

struct BandpassBand {
  double low_hz = 0.0;
  double high_hz = 0.0;
};

struct DenoiseConfig {
  std::optional<int> detrend_order;       // nullopt = stage off
  std::optional<BandpassBand> bandpass_hz;
  bool regress_global_signal = false;
  std::optional<NuisanceSet> extra_nuisance;

  bool any_stage_enabled() const {
    return detrend_order.has_value() || bandpass_hz.has_value() ||
           regress_global_signal || extra_nuisance.has_value();
  }
};

/// Replace each column by its residual after a least-squares polynomial fit
/// of the given degree in the time index. Throws OrderTooHigh when
/// T <= order + 1.
RoiTimeSeries detrend(const RoiTimeSeries& ts, int order);

/// Hard spectral mask: DFT each column, zero every bin whose frequency lies
/// outside [low_hz, high_hz], inverse transform. Requires
/// 0 <= low_hz < high_hz <= Nyquist = 1/(2*tr). Throws BandOutOfRange.
RoiTimeSeries bandpass(const RoiTimeSeries& ts, double low_hz, double high_hz);

/// Whole-cohort mean time course: element t is the mean of row t over all
/// regions.
Eigen::VectorXd global_signal(const RoiTimeSeries& ts);

/// OLS-residualize every column against [intercept | regressors]. Throws
/// LengthMismatch and RankDeficientDesign (smallest singular value below
/// 1e-10 times the largest).
RoiTimeSeries nuisance_regress(const RoiTimeSeries& ts,
                               const NuisanceSet& nuisance);

/// Apply the configured stages in order: detrend, band-pass, then nuisance
/// regression with the global signal (computed from the filtered data)
/// appended when requested. Identity when no stage is enabled.
RoiTimeSeries run_denoise(const RoiTimeSeries& ts, const DenoiseConfig& cfg);

}  // namespace fconn
