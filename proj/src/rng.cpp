#include "ifmsan/rng.hpp"

#include <cmath>
#include <numbers>

namespace ifmsan {

double ValueRng::normal(double mean, double stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return mean + stddev * radius * std::cos(angle);
}

std::uint32_t ValueRng::integer(std::uint32_t lo, std::uint32_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
  // Fixed-point multiply keeps the draw order identical everywhere.
  const std::uint64_t draw = engine_();
  return lo + static_cast<std::uint32_t>((draw * span) >> 32);
}

}  // namespace ifmsan
