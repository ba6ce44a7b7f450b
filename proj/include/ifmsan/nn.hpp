#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ifmsan/sanitizer.hpp"
#include "ifmsan/tensor.hpp"

namespace ifmsan {

enum class LayerKind {
  convolution,
  relu,
  maxpool,
  lrn,
  fullyconnected,
  softmax,
};

std::string_view to_string(LayerKind kind) noexcept;
std::optional<LayerKind> layer_kind_from(std::string_view name) noexcept;

struct ConvParams {
  std::uint32_t out_channels = 0;
  std::uint32_t kernel_h = 0;
  std::uint32_t kernel_w = 0;
  std::uint32_t stride = 1;
  std::uint32_t pad = 0;
  std::uint32_t groups = 1;
};

struct PoolParams {
  std::uint32_t kernel = 0;
  std::uint32_t stride = 1;
};

struct LrnParams {
  std::uint32_t local_size = 5;
  double alpha = 1e-4;
  double beta = 0.75;
  double k = 1.0;
};

struct FcParams {
  std::uint32_t out_features = 0;
};

/// One layer: name, kind, kind-specific parameters, and learned tensors
/// (convolution kernels are [out, in/groups, kh, kw]; fully-connected
/// weights are [out, in]; bias is [out] and defaults to zeros when absent).
struct LayerDescriptor {
  std::string name;
  LayerKind kind = LayerKind::relu;
  std::variant<std::monostate, ConvParams, PoolParams, LrnParams, FcParams> params;
  std::optional<Tensor> weights;
  std::optional<Tensor> bias;
};

/// Output dims of `layer` applied to an input of shape `in`. Validates the
/// layer parameters and weight shapes; throws DimensionError or ConfigError.
Dims output_dims(const LayerDescriptor& layer, const Dims& in);

/// Ordered layer list; the composition runs first to last and must end in
/// softmax. Immutable after construction for inference purposes.
struct Model {
  Dims input_dims;
  std::vector<LayerDescriptor> layers;

  /// Checks name uniqueness, parameter/kind consistency, shape composition
  /// from input_dims, and the terminal softmax.
  void validate() const;

  const LayerDescriptor* find(std::string_view name) const noexcept;
};

/// Applies one layer. Standard semantics: convolution is cross-correlation
/// plus bias; relu clamps at zero; maxpool takes windowed maxima; lrn
/// normalizes across channels; fullyconnected is weight * x + bias; softmax
/// subtracts the max before exponentiating. Dot products accumulate in
/// 64-bit, storage stays 32-bit.
Tensor layer_forward(const LayerDescriptor& layer, const Tensor& ifm);

/// Runs the model. Before each layer named in `plan`, the layer's input
/// feature map is replaced by sanitize_ifm(ifm, n); the sanitized copy is
/// materialized in full before the layer consumes it and the original
/// activation is never mutated. Returns the softmax output.
/// Throws ConfigError when the plan names a layer the model does not have.
std::vector<float> infer(const Model& model, const Tensor& input,
                         const SanitizationPlan& plan = {});

/// The feature map that enters `layer` during a run under `plan`, captured
/// before that layer's own plan entry (if any) is applied.
Tensor ifm_at(const Model& model, const Tensor& input, std::string_view layer,
              const SanitizationPlan& plan = {});

struct TopClass {
  std::size_t index = 0;
  double probability = 0.0;
};

/// Index and value of the maximum probability; ties go to the lowest index.
TopClass top_class(std::span<const float> probabilities);

}  // namespace ifmsan
