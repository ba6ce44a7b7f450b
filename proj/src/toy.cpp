#include "ifmsan/toy.hpp"

#include <utility>
#include <vector>

#include "ifmsan/rng.hpp"

namespace ifmsan {
namespace {

Tensor random_tensor(ValueRng& rng, Dims dims, double stddev) {
  std::vector<float> values(element_count(dims));
  for (float& v : values) {
    v = static_cast<float>(rng.normal(0.0, stddev));
  }
  return Tensor(std::move(dims), std::move(values));
}

Tensor random_bias(ValueRng& rng, std::uint32_t len, double magnitude) {
  std::vector<float> values(len);
  for (float& v : values) {
    v = static_cast<float>(rng.uniform(-magnitude, magnitude));
  }
  return Tensor({len}, std::move(values));
}

}  // namespace

Model make_toy_model(std::uint32_t seed) {
  ValueRng rng(seed);
  Model model;
  model.input_dims = {3, 16, 16};

  LayerDescriptor conv1;
  conv1.name = "conv1";
  conv1.kind = LayerKind::convolution;
  conv1.params = ConvParams{.out_channels = 8, .kernel_h = 3, .kernel_w = 3,
                            .stride = 1, .pad = 1, .groups = 1};
  conv1.weights = random_tensor(rng, {8, 3, 3, 3}, 0.25);
  conv1.bias = random_bias(rng, 8, 0.05);
  model.layers.push_back(std::move(conv1));

  LayerDescriptor relu1;
  relu1.name = "relu1";
  relu1.kind = LayerKind::relu;
  model.layers.push_back(std::move(relu1));

  LayerDescriptor pool1;
  pool1.name = "pool1";
  pool1.kind = LayerKind::maxpool;
  pool1.params = PoolParams{.kernel = 2, .stride = 2};
  model.layers.push_back(std::move(pool1));

  LayerDescriptor norm1;
  norm1.name = "norm1";
  norm1.kind = LayerKind::lrn;
  norm1.params = LrnParams{};
  model.layers.push_back(std::move(norm1));

  LayerDescriptor fc1;
  fc1.name = "fc1";
  fc1.kind = LayerKind::fullyconnected;
  fc1.params = FcParams{.out_features = 10};
  fc1.weights = random_tensor(rng, {10, 512}, 0.2);
  fc1.bias = random_bias(rng, 10, 0.05);
  model.layers.push_back(std::move(fc1));

  LayerDescriptor prob;
  prob.name = "prob";
  prob.kind = LayerKind::softmax;
  model.layers.push_back(std::move(prob));

  return model;
}

Tensor make_toy_input(std::uint32_t seed) {
  // Decorrelated from the weight stream so model and input can share a seed.
  ValueRng rng(seed ^ 0x9e3779b9u);
  std::vector<float> values(3 * 16 * 16);
  for (float& v : values) {
    if (rng.uniform() < 0.3) {
      v = 0.0f;
    } else {
      v = static_cast<float>(rng.uniform(0.0, 1.0));
    }
  }
  return Tensor({3, 16, 16}, std::move(values));
}

}  // namespace ifmsan
