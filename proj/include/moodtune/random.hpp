#pragma once

#include <cstdint>
#include <random>

namespace moodtune {

/// Seeded random source passed explicitly to every stochastic operation.
///
/// Built on std::mt19937_64, whose output sequence is fixed by the standard.
/// The derived draws below avoid the standard distributions because their
/// algorithms are implementation-defined, which would break cross-platform
/// reproducibility for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Rejection keeps the draw unbiased for bounds that do not divide 2^64.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace moodtune
