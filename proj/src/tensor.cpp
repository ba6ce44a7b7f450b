#include "ifmsan/tensor.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <utility>

namespace ifmsan {

std::size_t element_count(const Dims& dims) {
  if (dims.empty()) {
    throw DimensionError("tensor rank must be at least 1");
  }
  std::size_t count = 1;
  for (std::uint32_t d : dims) {
    if (d == 0) {
      throw DimensionError("every tensor axis must be at least 1");
    }
    if (count > std::numeric_limits<std::size_t>::max() / d) {
      throw DimensionError("tensor element count overflows");
    }
    count *= d;
  }
  return count;
}

Tensor::Tensor(Dims dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  const std::size_t expected = element_count(dims_);
  if (data_.size() != expected) {
    throw DimensionError("payload holds " + std::to_string(data_.size()) +
                         " samples but dims require " + std::to_string(expected));
  }
}

Tensor Tensor::zeros(Dims dims) {
  const std::size_t count = element_count(dims);
  return Tensor(std::move(dims), std::vector<float>(count, 0.0f));
}

bool Tensor::same_dims(const Tensor& other) const noexcept {
  return dims_ == other.dims_;
}

std::span<const float> unfold(const Tensor& t) noexcept { return t.values(); }

Tensor fold(std::span<const float> stream, Dims dims) {
  const std::size_t expected = element_count(dims);
  if (stream.size() != expected) {
    throw DimensionError("stream holds " + std::to_string(stream.size()) +
                         " samples but dims require " + std::to_string(expected));
  }
  return Tensor(std::move(dims), std::vector<float>(stream.begin(), stream.end()));
}

double zero_ratio(const Tensor& t) noexcept {
  const auto values = t.values();
  const auto zeros = std::count(values.begin(), values.end(), 0.0f);
  return static_cast<double>(zeros) / static_cast<double>(values.size());
}

}  // namespace ifmsan
