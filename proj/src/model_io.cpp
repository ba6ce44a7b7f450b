#include "ifmsan/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <utility>

#include <json.hpp>

#include "ifmsan/errors.hpp"
#include "ifmsan/tensor_io.hpp"

namespace ifmsan {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw FormatError("model manifest " + path.string() + ": " + what);
}

void check_keys(const std::filesystem::path& path, const json& obj,
                const std::string& where,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional) {
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    const bool known =
        std::find(required.begin(), required.end(), key) != required.end() ||
        std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) {
      fail(path, where + ": unknown field \"" + key + "\"");
    }
  }
  for (const char* key : required) {
    if (!obj.contains(key)) {
      fail(path, where + ": missing field \"" + key + "\"");
    }
  }
}

std::uint32_t get_u32(const std::filesystem::path& path, const json& obj,
                      const std::string& where, const char* key,
                      std::uint32_t fallback, bool required) {
  if (!obj.contains(key)) {
    if (required) {
      fail(path, where + ": missing field \"" + key + "\"");
    }
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > 0xffffffffull) {
    fail(path, where + ": field \"" + key + "\" must be a non-negative integer");
  }
  return v.get<std::uint32_t>();
}

double get_number(const std::filesystem::path& path, const json& obj,
                  const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) {
    fail(path, where + ": field \"" + key + "\" must be a number");
  }
  return v.get<double>();
}

Tensor load_weight(const std::filesystem::path& manifest, const json& obj,
                   const std::string& where, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_string()) {
    fail(manifest, where + ": field \"" + key + "\" must be a path string");
  }
  const auto resolved = manifest.parent_path() / v.get<std::string>();
  return read_tensor(resolved);
}

LayerDescriptor parse_layer(const std::filesystem::path& path, const json& obj) {
  if (!obj.is_object()) {
    fail(path, "every layer entry must be an object");
  }
  if (!obj.contains("name") || !obj.at("name").is_string()) {
    fail(path, "every layer needs a string \"name\"");
  }
  LayerDescriptor layer;
  layer.name = obj.at("name").get<std::string>();
  const std::string where = "layer " + layer.name;

  if (!obj.contains("kind") || !obj.at("kind").is_string()) {
    fail(path, where + ": missing string field \"kind\"");
  }
  const auto kind = layer_kind_from(obj.at("kind").get<std::string>());
  if (!kind) {
    fail(path, where + ": unknown kind \"" + obj.at("kind").get<std::string>() + "\"");
  }
  layer.kind = *kind;

  switch (layer.kind) {
    case LayerKind::convolution: {
      check_keys(path, obj, where, {"name", "kind", "out_channels", "kernel", "weights"},
                 {"stride", "pad", "groups", "bias"});
      ConvParams p;
      p.out_channels = get_u32(path, obj, where, "out_channels", 0, true);
      const json& kernel = obj.at("kernel");
      if (!kernel.is_array() || kernel.size() != 2 || !kernel[0].is_number_unsigned() ||
          !kernel[1].is_number_unsigned()) {
        fail(path, where + ": \"kernel\" must be [kh, kw]");
      }
      p.kernel_h = kernel[0].get<std::uint32_t>();
      p.kernel_w = kernel[1].get<std::uint32_t>();
      p.stride = get_u32(path, obj, where, "stride", 1, false);
      p.pad = get_u32(path, obj, where, "pad", 0, false);
      p.groups = get_u32(path, obj, where, "groups", 1, false);
      layer.params = p;
      layer.weights = load_weight(path, obj, where, "weights");
      if (obj.contains("bias")) {
        layer.bias = load_weight(path, obj, where, "bias");
      }
      break;
    }
    case LayerKind::maxpool: {
      check_keys(path, obj, where, {"name", "kind", "kernel", "stride"}, {});
      PoolParams p;
      p.kernel = get_u32(path, obj, where, "kernel", 0, true);
      p.stride = get_u32(path, obj, where, "stride", 0, true);
      layer.params = p;
      break;
    }
    case LayerKind::lrn: {
      check_keys(path, obj, where, {"name", "kind"},
                 {"local_size", "alpha", "beta", "k"});
      LrnParams p;
      p.local_size = get_u32(path, obj, where, "local_size", p.local_size, false);
      p.alpha = get_number(path, obj, where, "alpha", p.alpha);
      p.beta = get_number(path, obj, where, "beta", p.beta);
      p.k = get_number(path, obj, where, "k", p.k);
      layer.params = p;
      break;
    }
    case LayerKind::fullyconnected: {
      check_keys(path, obj, where, {"name", "kind", "out_features", "weights"},
                 {"bias"});
      FcParams p;
      p.out_features = get_u32(path, obj, where, "out_features", 0, true);
      layer.params = p;
      layer.weights = load_weight(path, obj, where, "weights");
      if (obj.contains("bias")) {
        layer.bias = load_weight(path, obj, where, "bias");
      }
      break;
    }
    case LayerKind::relu:
    case LayerKind::softmax: {
      check_keys(path, obj, where, {"name", "kind"}, {});
      break;
    }
  }
  return layer;
}

}  // namespace

Model load_model(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    fail(manifest_path, "cannot open");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(manifest_path, std::string("JSON parse failed: ") + e.what());
  }
  if (!doc.is_object()) {
    fail(manifest_path, "top level must be an object");
  }
  check_keys(manifest_path, doc, "manifest", {"input_dims", "layers"}, {});

  const json& dims = doc.at("input_dims");
  if (!dims.is_array() || dims.empty()) {
    fail(manifest_path, "\"input_dims\" must be a non-empty array");
  }
  Model model;
  for (const json& d : dims) {
    if (!d.is_number_unsigned() || d.get<std::uint64_t>() == 0 ||
        d.get<std::uint64_t>() > 0xffffffffull) {
      fail(manifest_path, "\"input_dims\" entries must be positive integers");
    }
    model.input_dims.push_back(d.get<std::uint32_t>());
  }

  const json& layers = doc.at("layers");
  if (!layers.is_array() || layers.empty()) {
    fail(manifest_path, "\"layers\" must be a non-empty array");
  }
  for (const json& entry : layers) {
    model.layers.push_back(parse_layer(manifest_path, entry));
  }

  try {
    model.validate();
  } catch (const Error& e) {
    fail(manifest_path, e.what());
  }
  return model;
}

void save_model(const Model& model, const std::filesystem::path& dir,
                const std::string& manifest_name) {
  model.validate();
  std::filesystem::create_directories(dir);

  ordered_json doc;
  doc["input_dims"] = model.input_dims;
  doc["layers"] = ordered_json::array();
  for (const auto& layer : model.layers) {
    ordered_json entry;
    entry["name"] = layer.name;
    entry["kind"] = std::string(to_string(layer.kind));
    switch (layer.kind) {
      case LayerKind::convolution: {
        const auto& p = std::get<ConvParams>(layer.params);
        entry["out_channels"] = p.out_channels;
        entry["kernel"] = {p.kernel_h, p.kernel_w};
        entry["stride"] = p.stride;
        entry["pad"] = p.pad;
        if (p.groups != 1) {
          entry["groups"] = p.groups;
        }
        break;
      }
      case LayerKind::maxpool: {
        const auto& p = std::get<PoolParams>(layer.params);
        entry["kernel"] = p.kernel;
        entry["stride"] = p.stride;
        break;
      }
      case LayerKind::lrn: {
        const auto& p = std::get<LrnParams>(layer.params);
        entry["local_size"] = p.local_size;
        entry["alpha"] = p.alpha;
        entry["beta"] = p.beta;
        entry["k"] = p.k;
        break;
      }
      case LayerKind::fullyconnected: {
        const auto& p = std::get<FcParams>(layer.params);
        entry["out_features"] = p.out_features;
        break;
      }
      case LayerKind::relu:
      case LayerKind::softmax:
        break;
    }
    if (layer.weights) {
      const std::string file = layer.name + "_w.ifmt";
      write_tensor(dir / file, *layer.weights);
      entry["weights"] = file;
    }
    if (layer.bias) {
      const std::string file = layer.name + "_b.ifmt";
      write_tensor(dir / file, *layer.bias);
      entry["bias"] = file;
    }
    doc["layers"].push_back(entry);
  }

  const auto manifest_path = dir / manifest_name;
  std::ofstream out(manifest_path);
  if (!out) {
    throw FormatError("model manifest " + manifest_path.string() +
                      ": cannot open for writing");
  }
  out << doc.dump(2) << '\n';
  if (!out) {
    throw FormatError("model manifest " + manifest_path.string() + ": write failed");
  }
}

}  // namespace ifmsan
