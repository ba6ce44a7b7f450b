#include "ifmsan/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace ifmsan {
namespace {

constexpr std::size_t kMaxRank = 32;

[[noreturn]] void fail(const std::string& name, const std::string& what) {
  throw FormatError("tensor file " + name + ": " + what);
}

std::uint32_t read_u32le(std::istream& in, const std::string& name,
                         const char* field) {
  std::array<unsigned char, 4> raw{};
  in.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (!in) {
    fail(name, std::string("truncated while reading ") + field);
  }
  return static_cast<std::uint32_t>(raw[0]) |
         (static_cast<std::uint32_t>(raw[1]) << 8) |
         (static_cast<std::uint32_t>(raw[2]) << 16) |
         (static_cast<std::uint32_t>(raw[3]) << 24);
}

void write_u32le(std::ostream& out, std::uint32_t value) {
  const std::array<char, 4> raw = {
      static_cast<char>(value & 0xff),
      static_cast<char>((value >> 8) & 0xff),
      static_cast<char>((value >> 16) & 0xff),
      static_cast<char>((value >> 24) & 0xff),
  };
  out.write(raw.data(), raw.size());
}

}  // namespace

Tensor read_tensor(std::istream& in, const std::string& name) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || std::memcmp(magic.data(), kTensorMagic, 4) != 0) {
    fail(name, "bad magic, expected \"IFMT\"");
  }
  const std::uint32_t version = read_u32le(in, name, "version");
  if (version != kTensorFormatVersion) {
    fail(name, "unsupported format version " + std::to_string(version));
  }
  const std::uint32_t rank = read_u32le(in, name, "rank");
  if (rank == 0 || rank > kMaxRank) {
    fail(name, "rank " + std::to_string(rank) + " out of range [1, " +
                   std::to_string(kMaxRank) + "]");
  }
  Dims dims(rank);
  for (std::uint32_t i = 0; i < rank; ++i) {
    dims[i] = read_u32le(in, name, "dims");
  }
  std::size_t count = 0;
  try {
    count = element_count(dims);
  } catch (const DimensionError& e) {
    fail(name, e.what());
  }

  // Bound the allocation by the actual bytes left in the stream.
  const auto payload_pos = in.tellg();
  in.seekg(0, std::ios::end);
  const auto end_pos = in.tellg();
  in.seekg(payload_pos);
  const auto available = static_cast<std::uint64_t>(end_pos - payload_pos);
  const std::uint64_t expected = static_cast<std::uint64_t>(count) * 4;
  if (available < expected) {
    fail(name, "payload truncated: need " + std::to_string(expected) +
                   " bytes, found " + std::to_string(available));
  }
  if (available > expected) {
    fail(name, "trailing bytes after payload");
  }

  std::vector<unsigned char> raw(expected);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) {
    fail(name, "truncated while reading payload");
  }
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* p = raw.data() + i * 4;
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    data[i] = std::bit_cast<float>(bits);
  }
  return Tensor(std::move(dims), std::move(data));
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("tensor file " + path.string() + ": cannot open");
  }
  return read_tensor(in, path.string());
}

void write_tensor(std::ostream& out, const Tensor& t) {
  out.write(kTensorMagic, 4);
  write_u32le(out, kTensorFormatVersion);
  write_u32le(out, static_cast<std::uint32_t>(t.rank()));
  for (std::uint32_t d : t.dims()) {
    write_u32le(out, d);
  }
  for (float v : t.values()) {
    write_u32le(out, std::bit_cast<std::uint32_t>(v));
  }
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw FormatError("tensor file " + path.string() + ": cannot open for writing");
  }
  write_tensor(out, t);
  out.flush();
  if (!out) {
    throw FormatError("tensor file " + path.string() + ": write failed");
  }
}

}  // namespace ifmsan
