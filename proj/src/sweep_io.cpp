#include "ifmsan/sweep_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "ifmsan/errors.hpp"

namespace ifmsan {
namespace {

constexpr char kHeader[] = "window_size,probability";

std::string format_probability(double p) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6f", p);
  return buffer;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line,
                       const std::string& what) {
  throw FormatError("sweep csv " + path.string() + ":" + std::to_string(line) +
                    ": " + what);
}

}  // namespace

std::string sweep_csv(std::span<const SweepRecord> records) {
  std::string out = kHeader;
  out += '\n';
  for (const auto& record : records) {
    out += std::to_string(record.window_size);
    out += ',';
    out += format_probability(record.probability);
    out += '\n';
  }
  return out;
}

void write_sweep_csv(const std::filesystem::path& path,
                     std::span<const SweepRecord> records) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("sweep csv " + path.string() + ": cannot open for writing");
  }
  out << sweep_csv(records);
  out.flush();
  if (!out) {
    throw FormatError("sweep csv " + path.string() + ": write failed");
  }
}

std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("sweep csv " + path.string() + ": cannot open");
  }
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) {
    fail(path, line_no, "missing header");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != kHeader) {
    fail(path, line_no, "header must be \"" + std::string(kHeader) + "\"");
  }

  std::vector<SweepRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      fail(path, line_no, "expected \"window_size,probability\"");
    }
    SweepRecord record;
    const char* begin = line.data();
    const auto [size_end, size_err] =
        std::from_chars(begin, begin + comma, record.window_size);
    if (size_err != std::errc{} || size_end != begin + comma) {
      fail(path, line_no, "bad window size");
    }
    try {
      std::size_t used = 0;
      record.probability = std::stod(line.substr(comma + 1), &used);
      if (used != line.size() - comma - 1) {
        fail(path, line_no, "bad probability");
      }
    } catch (const std::logic_error&) {
      fail(path, line_no, "bad probability");
    }
    records.push_back(record);
  }
  return records;
}

std::string format_summary(const SweepSummary& summary) {
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer),
                "eff_san=%.6f\ndistinct_low=%zu\ndistinct_mid=%zu\n"
                "distinct_high=%zu\nzero_ratio=%.6f\n",
                summary.eff_san, summary.histogram.low, summary.histogram.mid,
                summary.histogram.high, summary.zero_ratio);
  return buffer;
}

}  // namespace ifmsan
