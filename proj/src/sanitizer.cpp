#include "ifmsan/sanitizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ifmsan/errors.hpp"

namespace ifmsan {

void sanitize_window(std::span<float> window) {
  double sum = 0.0;
  std::size_t nonzero = 0;
  for (float v : window) {
    if (v != 0.0f) {
      sum += v;
      ++nonzero;
    }
  }
  if (nonzero == 0) {
    return;
  }
  const double mean = sum / static_cast<double>(nonzero);

  float held = 0.0f;
  double best = std::numeric_limits<double>::infinity();
  for (float v : window) {
    if (v == 0.0f) {
      continue;
    }
    const double distance = std::abs(static_cast<double>(v) - mean);
    if (distance < best) {
      best = distance;
      held = v;
    }
  }
  std::fill(window.begin(), window.end(), held);
}

std::vector<float> sanitize_stream(std::span<const float> stream, std::size_t n) {
  if (n == 0) {
    throw ParameterError("sampling window size must be at least 1");
  }
  std::vector<float> out(stream.begin(), stream.end());
  if (n == 1) {
    return out;
  }
  for (std::size_t begin = 0; begin < out.size(); begin += n) {
    const std::size_t len = std::min(n, out.size() - begin);
    sanitize_window(std::span<float>(out).subspan(begin, len));
  }
  return out;
}

Tensor sanitize_ifm(const Tensor& t, std::size_t n) {
  return Tensor(t.dims(), sanitize_stream(unfold(t), n));
}

void SanitizationPlan::set(const std::string& layer, std::size_t n) {
  if (n == 0) {
    throw ParameterError("sampling window size must be at least 1");
  }
  if (n == 1) {
    entries_.erase(layer);
    return;
  }
  entries_[layer] = n;
}

std::optional<std::size_t> SanitizationPlan::window_for(std::string_view layer) const {
  const auto it = entries_.find(layer);
  if (it == entries_.end()) {
    return std::nullopt;
  }
  return it->second;
}

bool SanitizationPlan::contains(std::string_view layer) const {
  return entries_.contains(layer);
}

SanitizationPlan SanitizationPlan::merged(const SanitizationPlan& a,
                                          const SanitizationPlan& b) {
  SanitizationPlan out = a;
  for (const auto& [layer, n] : b.entries_) {
    if (out.contains(layer)) {
      throw ConfigError("layer " + layer + " appears in both plans");
    }
    out.entries_[layer] = n;
  }
  return out;
}

}  // namespace ifmsan
