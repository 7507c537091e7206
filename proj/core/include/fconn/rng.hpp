// Deterministic random number generation. All randomness in the library flows
// through this generator so that cohorts, forests, and reports are
// byte-reproducible across runs, thread counts, and platforms; the standard
// <random> distributions are implementation-defined and would break that.
//
// The core is SplitMix64: a counter stepped by the golden-ratio increment and
// passed through a fixed 64-bit finalizer. Independent streams are derived by
// mixing a stream index into the seed, which is what makes per-subject,
// per-tree, and per-fold work order-independent.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fconn {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  /// Derive the seed of an independent substream (subject, tree, component).
  static constexpr std::uint64_t derive(std::uint64_t base,
                                        std::uint64_t stream) noexcept {
    return detail::mix64(base + detail::kGolden * (stream + 1));
  }

  std::uint64_t next_u64() noexcept {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept {
    // Lemire-style multiply-shift; the slight modulo bias at 64 bits is far
    // below anything observable here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// ±1 with equal probability.
  double sign() noexcept { return (next_u64() & 1u) ? 1.0 : -1.0; }

  /// Standard normal via Box-Muller; caches the paired deviate.
  double gaussian() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fconn
