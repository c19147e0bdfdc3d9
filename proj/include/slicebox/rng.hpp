#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "slicebox/errors.hpp"

namespace slicebox {

/// SplitMix64 finalizer, used to spread (seed, stream) pairs over the
/// generator's seed space.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seedable uniform source backed by std::mt19937_64, whose output sequence
/// is fixed by the C++ standard. Conversion to reals is done here rather than
/// through std::uniform_real_distribution, which is not portable.
///
/// A stream is single-owner; independent chains use RngStream(seed, chain).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), engine_(splitmix64(seed ^ splitmix64(stream))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Uniform on (0, 1): multiples of 2^-53, with 0 remapped to 2^-53.
  double uniform01() {
    constexpr double kStep = 0x1p-53;
    const double u = static_cast<double>(engine_() >> 11) * kStep;
    return u == 0.0 ? kStep : u;
  }

  /// Uniform on [a, b); never returns b.
  double uniform(double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
      throw ArgumentError("uniform: need finite a < b, got [" + format_real(a) + ", " +
                          format_real(b) + ")");
    }
    const double v = a + (b - a) * uniform01();
    return v < b ? v : std::nextafter(b, a);
  }

  /// log u for u ~ Uniform(0, 1); always finite and <= 0.
  double log_uniform01() { return std::log(uniform01()); }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace slicebox
