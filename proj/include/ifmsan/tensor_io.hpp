#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ifmsan/tensor.hpp"

namespace ifmsan {

// Binary tensor container, all fields little-endian:
//   "IFMT" | u32 version (= 1) | u32 rank | rank x u32 dims |
//   product(dims) x f32 payload, width varying fastest.

inline constexpr char kTensorMagic[4] = {'I', 'F', 'M', 'T'};
inline constexpr std::uint32_t kTensorFormatVersion = 1;

/// Parses a tensor from `in`; `name` labels the source in diagnostics.
/// Throws FormatError on any framing problem, including trailing bytes.
Tensor read_tensor(std::istream& in, const std::string& name);
Tensor read_tensor(const std::filesystem::path& path);

void write_tensor(std::ostream& out, const Tensor& t);
void write_tensor(const std::filesystem::path& path, const Tensor& t);

}  // namespace ifmsan
