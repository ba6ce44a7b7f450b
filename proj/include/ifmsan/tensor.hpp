#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ifmsan/errors.hpp"

namespace ifmsan {

/// Axis sizes, outermost first. Feature maps are (channel, height, width);
/// flat vectors have a single axis.
using Dims = std::vector<std::uint32_t>;

/// Product of all axis sizes. Throws DimensionError on empty dims, a zero
/// axis, or overflow.
std::size_t element_count(const Dims& dims);

/// Dense n-dimensional array of 32-bit floats. The flat payload is laid out
/// with the last axis varying fastest (width, then height, then channel for
/// rank-3 maps). Immutable once constructed; safe to share across threads.
class Tensor {
 public:
  Tensor(Dims dims, std::vector<float> data);

  static Tensor zeros(Dims dims);

  const Dims& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const float> values() const noexcept { return data_; }

  float operator[](std::size_t i) const noexcept { return data_[i]; }

  /// (channel, row, column) accessor; only meaningful for rank-3 tensors.
  float at(std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return data_[(c * dims_[1] + y) * dims_[2] + x];
  }

  bool same_dims(const Tensor& other) const noexcept;

 private:
  Dims dims_;
  std::vector<float> data_;
};

/// Flat view of the tensor payload in width -> height -> channel order.
/// Zero-copy: the view is the storage.
std::span<const float> unfold(const Tensor& t) noexcept;

/// Inverse of unfold. Throws DimensionError when the stream length does not
/// match the requested dims.
Tensor fold(std::span<const float> stream, Dims dims);

/// Fraction of samples that are exactly zero.
double zero_ratio(const Tensor& t) noexcept;

}  // namespace ifmsan
