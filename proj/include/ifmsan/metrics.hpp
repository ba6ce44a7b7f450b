#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifmsan/nn.hpp"

namespace ifmsan {

/// One point of an accuracy-vs-window curve: the tracked class probability
/// when the swept layer is sanitized with this window size.
struct SweepRecord {
  std::size_t window_size = 0;
  double probability = 0.0;
};

/// Distinct probability counts per accuracy band: [0, 0.2], (0.2, 0.8],
/// (0.8, 1.0]. Bands partition [0, 1], closed on the right.
struct AccuracyHistogram {
  std::size_t low = 0;
  std::size_t mid = 0;
  std::size_t high = 0;

  std::size_t total() const noexcept { return low + mid + high; }
};

/// Runs one inference per window size in [n_from, n_to] with the plan
/// {layer: n}. The tracked class is fixed to the argmax of the unsanitized
/// inference. `jobs` > 1 evaluates points concurrently; the result is
/// identical to the sequential run.
std::vector<SweepRecord> sweep(const Model& model, const Tensor& input,
                               const std::string& layer, std::size_t n_from,
                               std::size_t n_to, unsigned jobs = 1);

/// As sweep, but every inference applies fixed_plan merged with {layer: n}.
/// Throws ConfigError when fixed_plan already covers the swept layer.
std::vector<SweepRecord> multi_layer_sweep(const Model& model, const Tensor& input,
                                           const SanitizationPlan& fixed_plan,
                                           const std::string& swept_layer,
                                           std::size_t n_from, std::size_t n_to,
                                           unsigned jobs = 1);

/// Sanitization efficiency: distinct probabilities (after rounding to
/// `distinctness_precision` decimal places) divided by the number of window
/// sizes swept. Records must be a sorted, contiguous range starting at
/// window size >= 2.
double eff_san(std::span<const SweepRecord> records, int distinctness_precision = 6);

/// Bins the distinct rounded probabilities of a sweep. Uses the same
/// rounding as eff_san so the band counts sum to its numerator.
AccuracyHistogram accuracy_histogram(std::span<const SweepRecord> records,
                                     int distinctness_precision = 6);

/// Smallest window size whose probability is below `threshold` with every
/// later record also below it; nullopt when the curve never settles there.
std::optional<std::size_t> attenuation_threshold(std::span<const SweepRecord> records,
                                                 double threshold);

}  // namespace ifmsan
