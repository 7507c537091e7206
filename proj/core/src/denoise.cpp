#include "fconn/denoise.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "text_util.hpp"

namespace fconn {

namespace {

// Residualize every column of data against the given design matrix via a
// rank-revealing QR. The residual is data - design * coef, orthogonal to the
// design's column space.
Eigen::MatrixXd residualize(const Eigen::MatrixXd& data,
                            const Eigen::MatrixXd& design) {
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd coef = qr.solve(data);
  return data - design * coef;
}

}  // namespace

RoiTimeSeries detrend(const RoiTimeSeries& ts, int order) {
  const auto t = static_cast<Eigen::Index>(ts.timepoints());
  if (order < 0) {
    throw Error(ErrorCode::spec_invalid, "detrend order must be >= 0");
  }
  if (t <= order + 1) {
    throw Error(ErrorCode::order_too_high,
                "detrend order " + std::to_string(order) + " needs more than " +
                    std::to_string(order + 1) + " timepoints, have " +
                    std::to_string(t));
  }

  // Polynomial basis in the time index, with time mapped to [-1, 1] so the
  // plain powers stay well conditioned.
  Eigen::MatrixXd basis(t, order + 1);
  for (Eigen::Index row = 0; row < t; ++row) {
    const double tau = 2.0 * double(row) / double(t - 1) - 1.0;
    double power = 1.0;
    for (int p = 0; p <= order; ++p) {
      basis(row, p) = power;
      power *= tau;
    }
  }

  RoiTimeSeries out = ts;
  out.data = residualize(ts.data, basis);
  return out;
}

RoiTimeSeries bandpass(const RoiTimeSeries& ts, double low_hz, double high_hz) {
  const double nyquist = 1.0 / (2.0 * ts.tr_seconds);
  if (!(low_hz >= 0.0) || !(low_hz < high_hz) || !(high_hz <= nyquist + 1e-12)) {
    throw Error(ErrorCode::band_out_of_range,
                "band [" + detail::format_double(low_hz) + ", " +
                    detail::format_double(high_hz) +
                    "] must satisfy 0 <= low < high <= Nyquist " +
                    detail::format_double(nyquist));
  }

  const auto t = static_cast<std::size_t>(ts.timepoints());
  const double df = 1.0 / (double(t) * ts.tr_seconds);

  // Bin k and its mirror t-k share the physical frequency min(k, t-k) * df;
  // masking them together keeps the inverse transform real.
  std::vector<bool> keep(t);
  for (std::size_t k = 0; k < t; ++k) {
    const std::size_t folded = std::min(k, t - k);
    const double freq = double(folded) * df;
    keep[k] = freq >= low_hz && freq <= high_hz;
  }

  Eigen::FFT<double> fft;
  RoiTimeSeries out = ts;
  std::vector<double> column(t);
  std::vector<std::complex<double>> spectrum(t);
  std::vector<std::complex<double>> back(t);
  for (std::size_t c = 0; c < ts.regions(); ++c) {
    for (std::size_t r = 0; r < t; ++r) {
      column[r] = ts.data(static_cast<Eigen::Index>(r),
                          static_cast<Eigen::Index>(c));
    }
    fft.fwd(spectrum, column);
    for (std::size_t k = 0; k < t; ++k) {
      if (!keep[k]) spectrum[k] = 0.0;
    }
    fft.inv(back, spectrum);
    for (std::size_t r = 0; r < t; ++r) {
      out.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          back[r].real();
    }
  }
  return out;
}

Eigen::VectorXd global_signal(const RoiTimeSeries& ts) {
  return ts.data.rowwise().mean();
}

RoiTimeSeries nuisance_regress(const RoiTimeSeries& ts,
                               const NuisanceSet& nuisance) {
  const auto t = static_cast<Eigen::Index>(ts.timepoints());
  const auto k = nuisance.regressors.cols();
  if (nuisance.regressors.rows() != t) {
    throw Error(ErrorCode::length_mismatch,
                "nuisance set has " + std::to_string(nuisance.regressors.rows()) +
                    " rows, series has " + std::to_string(t));
  }
  if (k + 1 >= t) {
    throw Error(ErrorCode::rank_deficient_design,
                "design with " + std::to_string(k + 1) +
                    " columns cannot be fit on " + std::to_string(t) + " rows");
  }

  Eigen::MatrixXd design(t, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = nuisance.regressors;

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
    throw Error(ErrorCode::rank_deficient_design,
                "nuisance design is rank deficient (singular value ratio " +
                    detail::format_double(sv(sv.size() - 1) / sv(0)) + ")");
  }

  RoiTimeSeries out = ts;
  out.data = residualize(ts.data, design);
  return out;
}

RoiTimeSeries run_denoise(const RoiTimeSeries& ts, const DenoiseConfig& cfg) {
  RoiTimeSeries current = ts;
  if (cfg.detrend_order) {
    current = detrend(current, *cfg.detrend_order);
  }
  if (cfg.bandpass_hz) {
    current = bandpass(current, cfg.bandpass_hz->low_hz, cfg.bandpass_hz->high_hz);
  }

  // Assemble the nuisance design in the filtered space: extra regressors
  // first, then the global signal of the current (already filtered) data.
  if (cfg.extra_nuisance || cfg.regress_global_signal) {
    NuisanceSet design;
    if (cfg.extra_nuisance) design = *cfg.extra_nuisance;
    if (cfg.regress_global_signal) {
      const Eigen::VectorXd gs = global_signal(current);
      design.names.emplace_back("global_signal");
      design.regressors.conservativeResize(
          static_cast<Eigen::Index>(current.timepoints()),
          design.regressors.cols() + 1);
      design.regressors.rightCols(1) = gs;
    }
    current = nuisance_regress(current, design);
  }
  return current;
}

}  // namespace fconn
