#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ifmsan/tensor.hpp"

namespace ifmsan {

/// Sample-and-hold on one window: every sample is replaced by the non-zero
/// sample closest to the mean of the window's non-zero samples. Distance
/// ties go to the earliest sample. All-zero windows are left untouched.
void sanitize_window(std::span<float> window);

/// Partitions `stream` into consecutive windows of `n` samples (the final
/// window keeps the remainder) and sanitizes each independently. n = 1 is
/// the identity. Throws ParameterError when n = 0.
std::vector<float> sanitize_stream(std::span<const float> stream, std::size_t n);

/// fold(sanitize_stream(unfold(t), n), t.dims()); dimensions preserved.
Tensor sanitize_ifm(const Tensor& t, std::size_t n);

/// Window size per layer name. Layers absent from the plan pass through
/// unchanged; a stored entry always has n >= 2 (setting n = 1 erases, since
/// a singleton window holds every sample in place).
class SanitizationPlan {
 public:
  SanitizationPlan() = default;

  /// Throws ParameterError when n = 0.
  void set(const std::string& layer, std::size_t n);

  std::optional<std::size_t> window_for(std::string_view layer) const;
  bool contains(std::string_view layer) const;
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  const std::map<std::string, std::size_t, std::less<>>& entries() const noexcept {
    return entries_;
  }

  /// Union of two plans. Throws ConfigError when a layer appears in both.
  static SanitizationPlan merged(const SanitizationPlan& a, const SanitizationPlan& b);

 private:
  std::map<std::string, std::size_t, std::less<>> entries_;
};

}  // namespace ifmsan
