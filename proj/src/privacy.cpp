#include "ifmsan/privacy.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ifmsan/sanitizer.hpp"

namespace ifmsan {
namespace {

void check_gamma(double gamma) {
  if (!(gamma >= 0.0)) {
    throw ParameterError("gamma must be non-negative");
  }
}

}  // namespace

double PrivacyBudget::epsilon_lower() const noexcept {
  return gamma * std::numbers::ln2;
}

double epsilon_lower_bound(double gamma) {
  check_gamma(gamma);
  return gamma * std::numbers::ln2;
}

bool meets_degree(double p_original, double p_sanitized, double gamma) {
  check_gamma(gamma);
  if (p_original == 0.0) {
    throw ParameterError("p_original = 0 leaves the sanitization ratio undefined");
  }
  if (!(p_original > 0.0) || p_original > 1.0) {
    throw ParameterError("p_original must lie in (0, 1]");
  }
  if (!(p_sanitized >= 0.0) || p_sanitized > 1.0) {
    throw ParameterError("p_sanitized must lie in [0, 1]");
  }
  return p_sanitized <= p_original / std::exp2(gamma);
}

double observed_privacy_loss(double p_original, double p_sanitized) {
  if (p_original == 0.0 || p_sanitized == 0.0) {
    throw ParameterError("zero probability leaves the privacy loss undefined");
  }
  if (!(p_original > 0.0) || p_original > 1.0 || !(p_sanitized > 0.0) ||
      p_sanitized > 1.0) {
    throw ParameterError("probabilities must lie in (0, 1]");
  }
  return std::log(p_original / p_sanitized);
}

ControlResult control_sanitize(const Model& model, const Tensor& input,
                               const std::string& layer, const PrivacyBudget& budget,
                               std::size_t n_max) {
  check_gamma(budget.gamma);
  if (model.find(layer) == nullptr) {
    throw ConfigError("model has no layer named " + layer);
  }

  const auto original = infer(model, input, {});
  const TopClass tracked = top_class(original);

  ControlResult result;
  result.p_original = tracked.probability;
  if (budget.gamma == 0.0) {
    result.window_size = 1;
    result.p_sanitized = tracked.probability;
    result.observed_epsilon = 0.0;
    return result;
  }
  if (n_max < 2) {
    throw ParameterError("n_max must be at least 2");
  }

  for (std::size_t n = 2; n <= n_max; ++n) {
    // One full inference per candidate window size; accuracy is not monotone
    // in n, so every size up to the first hit must actually be evaluated.
    SanitizationPlan plan;
    plan.set(layer, n);
    const auto probabilities = infer(model, input, plan);
    const double p = probabilities[tracked.index];
    result.trace.push_back(SweepRecord{n, p});
    if (meets_degree(tracked.probability, p, budget.gamma)) {
      result.window_size = n;
      result.p_sanitized = p;
      result.observed_epsilon = p > 0.0
                                    ? observed_privacy_loss(tracked.probability, p)
                                    : std::numeric_limits<double>::infinity();
      return result;
    }
  }
  throw BudgetUnreachableError(
      "no window size up to " + std::to_string(n_max) + " meets gamma = " +
          std::to_string(budget.gamma) + " at layer " + layer,
      tracked.probability, std::move(result.trace));
}

}  // namespace ifmsan
