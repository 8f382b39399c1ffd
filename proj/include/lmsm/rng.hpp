#pragma once

#include <cstdint>
#include <random>

namespace lmsm {

/// Seed of replicate `replicate` derived from a master seed.
///
/// Streams are addressed as `seed ^ replicate`; the xor result is passed
/// through a SplitMix64 finalizer before seeding the engine so that adjacent
/// master seeds do not start from correlated Mersenne Twister states.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replicate);

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit Mersenne Twister with platform-independent real conversions.
///
/// The standard distributions are implementation defined, so the uniform and
/// exponential variates are produced from raw engine bits here to keep
/// outputs byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

  /// Standard exponential.
  double exponential();

  /// Standard normal (Box-Muller, one variate per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace lmsm
