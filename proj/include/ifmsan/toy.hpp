#pragma once

#include <cstdint>

#include "ifmsan/nn.hpp"
#include "ifmsan/tensor.hpp"

namespace ifmsan {

/// Seed baked into the bundled demo assets and the CLI default.
inline constexpr std::uint32_t kDefaultToySeed = 3;

/// Small ten-class CNN with deterministic seeded weights:
/// conv1 (3->8, 3x3, pad 1) -> relu1 -> pool1 (2x2, stride 2) -> norm1 (lrn)
/// -> fc1 (512->10) -> prob (softmax), on a 3x16x16 input.
Model make_toy_model(std::uint32_t seed = kDefaultToySeed);

/// Matching 3x16x16 input with roughly 30% exact zeros.
Tensor make_toy_input(std::uint32_t seed = kDefaultToySeed);

}  // namespace ifmsan
