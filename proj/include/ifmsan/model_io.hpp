#pragma once

#include <filesystem>
#include <string>

#include "ifmsan/nn.hpp"

namespace ifmsan {

// Model manifest: a JSON object with exactly two top-level keys,
//   "input_dims": [c, h, w]
//   "layers": [ { "name": ..., "kind": ..., ... }, ... ]
// Layer fields by kind (unknown fields are rejected):
//   convolution    out_channels, kernel [kh, kw], stride?, pad?, groups?,
//                  weights (IFMT path), bias? (IFMT path)
//   maxpool        kernel, stride
//   lrn            local_size?, alpha?, beta?, k?
//   fullyconnected out_features, weights, bias?
//   relu, softmax  no extra fields
// Weight paths are resolved relative to the manifest's directory.

/// Loads and fully validates a model. Throws FormatError for anything wrong
/// with the manifest or the referenced tensor files.
Model load_model(const std::filesystem::path& manifest_path);

/// Writes `model` under `dir`: one manifest named `manifest_name` plus one
/// IFMT file per learned tensor. The directory is created if needed.
void save_model(const Model& model, const std::filesystem::path& dir,
                const std::string& manifest_name = "model.json");

}  // namespace ifmsan
