#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ifmsan/errors.hpp"
#include "ifmsan/metrics.hpp"
#include "ifmsan/nn.hpp"

namespace ifmsan {

/// Degree of sanitization. The sanitized probability has to fall to at most
/// original / 2^gamma, which fixes the privacy-loss lower bound at
/// gamma * ln 2. The bound is always derived, never stored.
struct PrivacyBudget {
  double gamma = 0.0;

  double epsilon_lower() const noexcept;
};

/// gamma * ln 2. Throws ParameterError for negative gamma.
double epsilon_lower_bound(double gamma);

/// Whether p_sanitized <= p_original / 2^gamma. Requires p_original in
/// (0, 1], p_sanitized in [0, 1], gamma >= 0; a zero p_original leaves the
/// ratio undefined and throws ParameterError.
bool meets_degree(double p_original, double p_sanitized, double gamma);

/// ln(p_original / p_sanitized). Both probabilities must be in (0, 1];
/// a negative result means the sanitization is invalid, which is the
/// caller's call to make.
double observed_privacy_loss(double p_original, double p_sanitized);

/// Outcome of a controller run that found a window size meeting the budget.
struct ControlResult {
  std::size_t window_size = 1;
  double p_original = 0.0;
  double p_sanitized = 0.0;
  double observed_epsilon = 0.0;
  std::vector<SweepRecord> trace;  // every window size visited, from 2 up
};

/// No window size up to n_max met the budget; carries everything visited.
class BudgetUnreachableError : public Error {
 public:
  BudgetUnreachableError(const std::string& message, double p_original,
                         std::vector<SweepRecord> trace)
      : Error(message), p_original_(p_original), trace_(std::move(trace)) {}

  double p_original() const noexcept { return p_original_; }
  const std::vector<SweepRecord>& trace() const noexcept { return trace_; }

 private:
  double p_original_;
  std::vector<SweepRecord> trace_;
};

/// Grows the sampling window at `layer` from 2 to n_max, one full inference
/// per step, and returns the first window size whose tracked-class
/// probability meets the budget. The tracked class is the argmax of the
/// unsanitized inference. gamma = 0 returns immediately with window size 1.
/// Each iteration reads the window counter, then the original feature map,
/// then writes the sanitized copy in full; iterations never overlap.
/// Throws BudgetUnreachableError when no window size up to n_max satisfies
/// the bound (accuracy is not monotone in the window size, so this is a
/// legitimate outcome).
ControlResult control_sanitize(const Model& model, const Tensor& input,
                               const std::string& layer, const PrivacyBudget& budget,
                               std::size_t n_max);

}  // namespace ifmsan
