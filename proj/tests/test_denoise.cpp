#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fconn/denoise.hpp"
#include "fconn/rng.hpp"
#include "test_helpers.hpp"

using namespace fconn;
using testutil::make_series;

namespace {

RoiTimeSeries random_series(std::size_t t, std::size_t r, std::uint64_t seed,
                            double tr = 2.0) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows(t, std::vector<double>(r));
  for (auto& row : rows) {
    for (auto& cell : row) cell = rng.gaussian();
  }
  return make_series(rows, {}, tr);
}

}  // namespace

TEST_CASE("detrend residual is orthogonal to the polynomial basis") {
  const auto ts = random_series(60, 3, 21);
  for (int order : {0, 1, 3}) {
    const auto out = detrend(ts, order);
    // check against the raw power basis; orthogonality is basis-independent
    for (int p = 0; p <= order; ++p) {
      Eigen::VectorXd basis(60);
      for (int k = 0; k < 60; ++k) basis(k) = std::pow(double(k), p);
      const double norm_b = basis.norm();
      for (int j = 0; j < 3; ++j) {
        const double inner = std::abs(out.data.col(j).dot(basis));
        CHECK(inner <= 1e-8 * norm_b * std::max(1.0, out.data.col(j).norm()));
      }
    }
  }
}

TEST_CASE("detrend rejects orders the series cannot support") {
  const auto ts = make_series({{1, 2}, {3, 4}, {5, 6}});
  CHECK_THROWS_AS(detrend(ts, 2), Error);  // T = 3 <= order + 1
  try {
    detrend(ts, 5);
    FAIL("expected OrderTooHigh");
  } catch (const Error& error) {
    CHECK(error.code() == ErrorCode::order_too_high);
  }
}

TEST_CASE("detrend is idempotent") {
  const auto ts = random_series(40, 4, 8);
  for (int order : {0, 1, 2}) {
    const auto once = detrend(ts, order);
    const auto twice = detrend(once, order);
    CHECK((twice.data - once.data).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("denoise stages are linear per column") {
  const auto x = random_series(64, 2, 101);
  const auto y = random_series(64, 2, 202);
  const double a = 1.7, b = -0.6;
  RoiTimeSeries combo = x;
  combo.data = a * x.data + b * y.data;

  SUBCASE("detrend") {
    const Eigen::MatrixXd lhs = detrend(combo, 2).data;
    const Eigen::MatrixXd rhs = a * detrend(x, 2).data + b * detrend(y, 2).data;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("bandpass") {
    const Eigen::MatrixXd lhs = bandpass(combo, 0.02, 0.2).data;
    const Eigen::MatrixXd rhs =
        a * bandpass(x, 0.02, 0.2).data + b * bandpass(y, 0.02, 0.2).data;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("nuisance regression") {
    NuisanceSet nuisance;
    nuisance.names = {"z"};
    nuisance.regressors = random_series(64, 1, 303).data;
    const Eigen::MatrixXd lhs = nuisance_regress(combo, nuisance).data;
    const Eigen::MatrixXd rhs = a * nuisance_regress(x, nuisance).data +
                                b * nuisance_regress(y, nuisance).data;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("bandpass keeps aligned in-band bins and kills out-of-band bins") {
  const std::size_t t = 96;
  const double tr = 2.0;
  const double df = 1.0 / (double(t) * tr);
  const double low = 0.02, high = 0.15;
  Rng rng(55);
  for (int trial = 0; trial < 25; ++trial) {
    const auto bin = 1 + rng.below(t / 2 - 1);
    const double freq = double(bin) * df;
    std::vector<std::vector<double>> rows(t, std::vector<double>(2));
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < t; ++k) {
      const double v = std::sin(2.0 * std::numbers::pi * freq * double(k) * tr + phase);
      rows[k] = {v, 0.5 * v};
    }
    const auto ts = make_series(rows, {}, tr);
    const auto out = bandpass(ts, low, high);
    const double rms_in = std::sqrt(ts.data.squaredNorm() / double(ts.data.size()));
    const double rms_diff =
        std::sqrt((out.data - ts.data).squaredNorm() / double(ts.data.size()));
    const double rms_out = std::sqrt(out.data.squaredNorm() / double(ts.data.size()));
    if (freq >= low && freq <= high) {
      CHECK(rms_diff < 1e-9 * std::max(1.0, rms_in));
    } else {
      CHECK(rms_out < 1e-9);
    }
  }
}

TEST_CASE("bandpass rejects malformed bands") {
  const auto ts = random_series(32, 2, 1, 2.0);  // Nyquist 0.25
  for (const auto [low, high] : {std::pair{-0.1, 0.1}, std::pair{0.2, 0.1},
                                 std::pair{0.1, 0.3}}) {
    try {
      bandpass(ts, low, high);
      FAIL("expected BandOutOfRange");
    } catch (const Error& error) {
      CHECK(error.code() == ErrorCode::band_out_of_range);
    }
  }
}

TEST_CASE("nuisance regression validates the design") {
  const auto ts = random_series(20, 2, 31);
  SUBCASE("length mismatch") {
    NuisanceSet nuisance;
    nuisance.regressors = random_series(19, 1, 5).data;
    try {
      nuisance_regress(ts, nuisance);
      FAIL("expected LengthMismatch");
    } catch (const Error& error) {
      CHECK(error.code() == ErrorCode::length_mismatch);
    }
  }
  SUBCASE("rank-deficient design (duplicated column)") {
    NuisanceSet nuisance;
    Eigen::MatrixXd z = random_series(20, 1, 6).data;
    nuisance.regressors.resize(20, 2);
    nuisance.regressors.col(0) = z;
    nuisance.regressors.col(1) = z;
    try {
      nuisance_regress(ts, nuisance);
      FAIL("expected RankDeficientDesign");
    } catch (const Error& error) {
      CHECK(error.code() == ErrorCode::rank_deficient_design);
    }
  }
  SUBCASE("constant regressor collides with the intercept") {
    NuisanceSet nuisance;
    nuisance.regressors = Eigen::MatrixXd::Ones(20, 1);
    CHECK_THROWS_AS(nuisance_regress(ts, nuisance), Error);
  }
}

TEST_CASE("nuisance residuals are zero-mean and orthogonal to regressors") {
  const auto ts = random_series(50, 4, 77);
  NuisanceSet nuisance;
  nuisance.names = {"a", "b"};
  nuisance.regressors = random_series(50, 2, 78).data;
  const auto out = nuisance_regress(ts, nuisance);
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(out.data.col(j).mean()) < 1e-9);
    for (int k = 0; k < 2; ++k) {
      const double inner = std::abs(out.data.col(j).dot(nuisance.regressors.col(k)));
      const double scale =
          out.data.col(j).norm() * nuisance.regressors.col(k).norm();
      CHECK(inner < 1e-8 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("run_denoise applies global-signal regression after filtering") {
  auto ts = random_series(80, 5, 90);
  DenoiseConfig cfg;
  cfg.detrend_order = 1;
  cfg.bandpass_hz = BandpassBand{0.01, 0.2};
  cfg.regress_global_signal = true;
  const auto out = run_denoise(ts, cfg);
  // the filtered-space global signal must be orthogonal to every output column
  const auto filtered = bandpass(detrend(ts, 1), 0.01, 0.2);
  const Eigen::VectorXd gs = global_signal(filtered);
  for (int j = 0; j < 5; ++j) {
    const double inner = std::abs(out.data.col(j).dot(gs));
    CHECK(inner < 1e-8 * std::max(1.0, out.data.col(j).norm() * gs.norm()));
  }
}

TEST_CASE("extra nuisance columns combine with the global signal") {
  auto ts = random_series(60, 3, 91);
  DenoiseConfig cfg;
  NuisanceSet extra;
  extra.names = {"motion"};
  extra.regressors = random_series(60, 1, 92).data;
  cfg.extra_nuisance = extra;
  cfg.regress_global_signal = true;
  const auto out = run_denoise(ts, cfg);
  for (int j = 0; j < 3; ++j) {
    const double inner =
        std::abs(out.data.col(j).dot(extra.regressors.col(0)));
    CHECK(inner < 1e-8 * std::max(1.0, out.data.col(j).norm() *
                                           extra.regressors.col(0).norm()));
  }
}
