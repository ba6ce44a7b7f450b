#pragma once

#include <cstdint>
#include <random>

namespace ifmsan {

/// Seeded value generation on top of std::mt19937. The standard
/// distributions are implementation-defined, so the transforms are spelled
/// out here; a seed produces the same values on every platform.
class ValueRng {
 public:
  explicit ValueRng(std::uint32_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_()) * 0x1p-32;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Box-Muller normal.
  double normal(double mean, double stddev);

  /// Uniform integer in [lo, hi].
  std::uint32_t integer(std::uint32_t lo, std::uint32_t hi);

 private:
  std::mt19937 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ifmsan
