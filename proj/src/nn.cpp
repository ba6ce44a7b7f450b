#include "ifmsan/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>
#include <utility>

#include "ifmsan/errors.hpp"

namespace ifmsan {
namespace {

[[noreturn]] void bad_layer(const LayerDescriptor& layer, const std::string& what) {
  throw DimensionError("layer " + layer.name + ": " + what);
}

template <typename Params>
const Params& params_of(const LayerDescriptor& layer) {
  const Params* p = std::get_if<Params>(&layer.params);
  if (p == nullptr) {
    throw ConfigError("layer " + layer.name + ": parameters do not match kind " +
                      std::string(to_string(layer.kind)));
  }
  return *p;
}

void require_no_params(const LayerDescriptor& layer) {
  if (!std::holds_alternative<std::monostate>(layer.params)) {
    throw ConfigError("layer " + layer.name + ": kind " +
                      std::string(to_string(layer.kind)) + " takes no parameters");
  }
}

// (in + 2*pad - kernel) / stride + 1, floor semantics; trailing samples that
// do not complete a step are dropped.
std::uint32_t strided_extent(const LayerDescriptor& layer, std::uint32_t in,
                             std::uint32_t kernel, std::uint32_t stride,
                             std::uint32_t pad) {
  const std::uint64_t padded = static_cast<std::uint64_t>(in) + 2ull * pad;
  if (kernel == 0) {
    bad_layer(layer, "kernel extent must be at least 1");
  }
  if (stride == 0) {
    bad_layer(layer, "stride must be at least 1");
  }
  if (padded < kernel) {
    bad_layer(layer, "kernel does not fit the padded input");
  }
  return static_cast<std::uint32_t>((padded - kernel) / stride + 1);
}

void check_bias(const LayerDescriptor& layer, std::uint32_t out_len) {
  if (!layer.bias) {
    return;
  }
  const Dims& b = layer.bias->dims();
  if (b.size() != 1 || b[0] != out_len) {
    bad_layer(layer, "bias must be a vector of length " + std::to_string(out_len));
  }
}

Dims conv_output_dims(const LayerDescriptor& layer, const Dims& in) {
  const auto& p = params_of<ConvParams>(layer);
  if (in.size() != 3) {
    bad_layer(layer, "convolution expects a (channel, height, width) input");
  }
  if (p.groups == 0 || in[0] % p.groups != 0 || p.out_channels == 0 ||
      p.out_channels % p.groups != 0) {
    bad_layer(layer, "channel counts must divide evenly into groups");
  }
  if (!layer.weights) {
    bad_layer(layer, "convolution needs a kernel tensor");
  }
  const Dims expected = {p.out_channels, in[0] / p.groups, p.kernel_h, p.kernel_w};
  if (layer.weights->dims() != expected) {
    bad_layer(layer, "kernel tensor must have dims (out, in/groups, kh, kw)");
  }
  check_bias(layer, p.out_channels);
  const std::uint32_t oh = strided_extent(layer, in[1], p.kernel_h, p.stride, p.pad);
  const std::uint32_t ow = strided_extent(layer, in[2], p.kernel_w, p.stride, p.pad);
  return {p.out_channels, oh, ow};
}

Dims pool_output_dims(const LayerDescriptor& layer, const Dims& in) {
  const auto& p = params_of<PoolParams>(layer);
  if (in.size() != 3) {
    bad_layer(layer, "maxpool expects a (channel, height, width) input");
  }
  if (layer.weights || layer.bias) {
    bad_layer(layer, "maxpool takes no learned tensors");
  }
  const std::uint32_t oh = strided_extent(layer, in[1], p.kernel, p.stride, 0);
  const std::uint32_t ow = strided_extent(layer, in[2], p.kernel, p.stride, 0);
  return {in[0], oh, ow};
}

Dims lrn_output_dims(const LayerDescriptor& layer, const Dims& in) {
  const auto& p = params_of<LrnParams>(layer);
  if (in.size() != 3) {
    bad_layer(layer, "lrn expects a (channel, height, width) input");
  }
  if (layer.weights || layer.bias) {
    bad_layer(layer, "lrn takes no learned tensors");
  }
  if (p.local_size == 0 || p.local_size % 2 == 0) {
    throw ConfigError("layer " + layer.name + ": lrn local_size must be odd");
  }
  if (p.alpha < 0.0 || p.beta < 0.0 || p.k <= 0.0) {
    throw ConfigError("layer " + layer.name + ": lrn constants out of range");
  }
  return in;
}

Dims fc_output_dims(const LayerDescriptor& layer, const Dims& in) {
  const auto& p = params_of<FcParams>(layer);
  if (p.out_features == 0) {
    bad_layer(layer, "out_features must be at least 1");
  }
  if (!layer.weights) {
    bad_layer(layer, "fullyconnected needs a weight tensor");
  }
  const std::size_t in_len = element_count(in);
  const Dims expected = {p.out_features, static_cast<std::uint32_t>(in_len)};
  if (layer.weights->dims() != expected) {
    bad_layer(layer, "weight tensor must have dims (out_features, flattened input)");
  }
  check_bias(layer, p.out_features);
  return {p.out_features};
}

Tensor conv_forward(const LayerDescriptor& layer, const Tensor& ifm, Dims out_dims) {
  const auto& p = params_of<ConvParams>(layer);
  const Tensor& w = *layer.weights;
  const std::size_t in_c = ifm.dims()[0];
  const std::size_t in_h = ifm.dims()[1];
  const std::size_t in_w = ifm.dims()[2];
  const std::size_t out_h = out_dims[1];
  const std::size_t out_w = out_dims[2];
  const std::size_t in_per_group = in_c / p.groups;
  const std::size_t out_per_group = p.out_channels / p.groups;

  std::vector<float> out(static_cast<std::size_t>(p.out_channels) * out_h * out_w);
  std::size_t o = 0;
  for (std::size_t oc = 0; oc < p.out_channels; ++oc) {
    const std::size_t group = oc / out_per_group;
    const std::size_t ic0 = group * in_per_group;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        double acc = layer.bias ? (*layer.bias)[oc] : 0.0;
        for (std::size_t ic = 0; ic < in_per_group; ++ic) {
          for (std::size_t ky = 0; ky < p.kernel_h; ++ky) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * p.stride + ky) - p.pad;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) {
              continue;
            }
            for (std::size_t kx = 0; kx < p.kernel_w; ++kx) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * p.stride + kx) - p.pad;
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_w)) {
                continue;
              }
              const float sample = ifm.at(ic0 + ic, static_cast<std::size_t>(iy),
                                          static_cast<std::size_t>(ix));
              const float weight =
                  w[((oc * in_per_group + ic) * p.kernel_h + ky) * p.kernel_w + kx];
              acc += static_cast<double>(sample) * static_cast<double>(weight);
            }
          }
        }
        out[o++] = static_cast<float>(acc);
      }
    }
  }
  return Tensor(std::move(out_dims), std::move(out));
}

Tensor relu_forward(const Tensor& ifm) {
  std::vector<float> out(ifm.size());
  const auto values = ifm.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = values[i] > 0.0f ? values[i] : 0.0f;
  }
  return Tensor(ifm.dims(), std::move(out));
}

Tensor pool_forward(const LayerDescriptor& layer, const Tensor& ifm, Dims out_dims) {
  const auto& p = params_of<PoolParams>(layer);
  const std::size_t channels = out_dims[0];
  const std::size_t out_h = out_dims[1];
  const std::size_t out_w = out_dims[2];

  std::vector<float> out(channels * out_h * out_w);
  std::size_t o = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        for (std::size_t ky = 0; ky < p.kernel; ++ky) {
          for (std::size_t kx = 0; kx < p.kernel; ++kx) {
            best = std::max(best, ifm.at(c, oy * p.stride + ky, ox * p.stride + kx));
          }
        }
        out[o++] = best;
      }
    }
  }
  return Tensor(std::move(out_dims), std::move(out));
}

Tensor lrn_forward(const LayerDescriptor& layer, const Tensor& ifm) {
  const auto& p = params_of<LrnParams>(layer);
  const std::size_t channels = ifm.dims()[0];
  const std::size_t height = ifm.dims()[1];
  const std::size_t width = ifm.dims()[2];
  const std::size_t half = (p.local_size - 1) / 2;
  const double scale = p.alpha / static_cast<double>(p.local_size);

  std::vector<float> out(ifm.size());
  std::size_t o = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    const std::size_t lo = c >= half ? c - half : 0;
    const std::size_t hi = std::min(channels - 1, c + half);
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        double energy = 0.0;
        for (std::size_t cc = lo; cc <= hi; ++cc) {
          const double v = ifm.at(cc, y, x);
          energy += v * v;
        }
        const double denom = std::pow(p.k + scale * energy, p.beta);
        out[o++] = static_cast<float>(ifm.at(c, y, x) / denom);
      }
    }
  }
  return Tensor(ifm.dims(), std::move(out));
}

Tensor fc_forward(const LayerDescriptor& layer, const Tensor& ifm, Dims out_dims) {
  const auto& p = params_of<FcParams>(layer);
  const Tensor& w = *layer.weights;
  const auto x = ifm.values();

  std::vector<float> out(p.out_features);
  for (std::size_t row = 0; row < p.out_features; ++row) {
    double acc = layer.bias ? (*layer.bias)[row] : 0.0;
    const std::size_t base = row * x.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc += static_cast<double>(w[base + i]) * static_cast<double>(x[i]);
    }
    out[row] = static_cast<float>(acc);
  }
  return Tensor(std::move(out_dims), std::move(out));
}

Tensor softmax_forward(const Tensor& ifm) {
  const auto x = ifm.values();
  const float top = *std::max_element(x.begin(), x.end());
  std::vector<double> shifted(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    shifted[i] = std::exp(static_cast<double>(x[i]) - static_cast<double>(top));
    sum += shifted[i];
  }
  std::vector<float> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<float>(shifted[i] / sum);
  }
  return Tensor(ifm.dims(), std::move(out));
}

void check_plan_layers(const Model& model, const SanitizationPlan& plan) {
  for (const auto& [layer, n] : plan.entries()) {
    if (model.find(layer) == nullptr) {
      throw ConfigError("plan names unknown layer " + layer);
    }
  }
}

void check_input_dims(const Model& model, const Tensor& input) {
  if (input.dims() != model.input_dims) {
    throw DimensionError("input tensor dims do not match the model input");
  }
}

}  // namespace

std::string_view to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::convolution: return "convolution";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::lrn: return "lrn";
    case LayerKind::fullyconnected: return "fullyconnected";
    case LayerKind::softmax: return "softmax";
  }
  return "unknown";
}

std::optional<LayerKind> layer_kind_from(std::string_view name) noexcept {
  if (name == "convolution") return LayerKind::convolution;
  if (name == "relu") return LayerKind::relu;
  if (name == "maxpool") return LayerKind::maxpool;
  if (name == "lrn") return LayerKind::lrn;
  if (name == "fullyconnected") return LayerKind::fullyconnected;
  if (name == "softmax") return LayerKind::softmax;
  return std::nullopt;
}

Dims output_dims(const LayerDescriptor& layer, const Dims& in) {
  element_count(in);
  switch (layer.kind) {
    case LayerKind::convolution:
      return conv_output_dims(layer, in);
    case LayerKind::maxpool:
      return pool_output_dims(layer, in);
    case LayerKind::lrn:
      return lrn_output_dims(layer, in);
    case LayerKind::fullyconnected:
      return fc_output_dims(layer, in);
    case LayerKind::relu:
      require_no_params(layer);
      return in;
    case LayerKind::softmax:
      require_no_params(layer);
      if (in.size() != 1) {
        bad_layer(layer, "softmax expects a flat vector");
      }
      return in;
  }
  throw ConfigError("layer " + layer.name + ": unknown kind");
}

void Model::validate() const {
  if (layers.empty()) {
    throw ConfigError("model has no layers");
  }
  std::unordered_set<std::string_view> names;
  for (const auto& layer : layers) {
    if (layer.name.empty()) {
      throw ConfigError("every layer needs a name");
    }
    if (!names.insert(layer.name).second) {
      throw ConfigError("duplicate layer name " + layer.name);
    }
  }
  if (layers.back().kind != LayerKind::softmax) {
    throw ConfigError("the final layer must be softmax");
  }
  Dims dims = input_dims;
  for (const auto& layer : layers) {
    dims = output_dims(layer, dims);
  }
}

const LayerDescriptor* Model::find(std::string_view name) const noexcept {
  for (const auto& layer : layers) {
    if (layer.name == name) {
      return &layer;
    }
  }
  return nullptr;
}

Tensor layer_forward(const LayerDescriptor& layer, const Tensor& ifm) {
  Dims out = output_dims(layer, ifm.dims());
  switch (layer.kind) {
    case LayerKind::convolution:
      return conv_forward(layer, ifm, std::move(out));
    case LayerKind::relu:
      return relu_forward(ifm);
    case LayerKind::maxpool:
      return pool_forward(layer, ifm, std::move(out));
    case LayerKind::lrn:
      return lrn_forward(layer, ifm);
    case LayerKind::fullyconnected:
      return fc_forward(layer, ifm, std::move(out));
    case LayerKind::softmax:
      return softmax_forward(ifm);
  }
  throw ConfigError("layer " + layer.name + ": unknown kind");
}

std::vector<float> infer(const Model& model, const Tensor& input,
                         const SanitizationPlan& plan) {
  model.validate();
  check_plan_layers(model, plan);
  check_input_dims(model, input);

  Tensor current = input;
  for (const auto& layer : model.layers) {
    if (const auto n = plan.window_for(layer.name)) {
      current = sanitize_ifm(current, *n);
    }
    current = layer_forward(layer, current);
  }
  const auto values = current.values();
  return std::vector<float>(values.begin(), values.end());
}

Tensor ifm_at(const Model& model, const Tensor& input, std::string_view layer,
              const SanitizationPlan& plan) {
  model.validate();
  check_plan_layers(model, plan);
  check_input_dims(model, input);
  if (model.find(layer) == nullptr) {
    throw ConfigError("model has no layer named " + std::string(layer));
  }

  Tensor current = input;
  for (const auto& step : model.layers) {
    if (step.name == layer) {
      return current;
    }
    if (const auto n = plan.window_for(step.name)) {
      current = sanitize_ifm(current, *n);
    }
    current = layer_forward(step, current);
  }
  throw ConfigError("model has no layer named " + std::string(layer));
}

TopClass top_class(std::span<const float> probabilities) {
  if (probabilities.empty()) {
    throw ParameterError("probability vector is empty");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < probabilities.size(); ++i) {
    if (probabilities[i] > probabilities[best]) {
      best = i;
    }
  }
  return TopClass{best, static_cast<double>(probabilities[best])};
}

}  // namespace ifmsan
