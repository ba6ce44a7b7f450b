#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ifmsan/metrics.hpp"

namespace ifmsan {

// Sweep CSV: a "window_size,probability" header, one row per record,
// probabilities printed with 6 decimals.

std::string sweep_csv(std::span<const SweepRecord> records);
void write_sweep_csv(const std::filesystem::path& path,
                     std::span<const SweepRecord> records);
std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path);

struct SweepSummary {
  double eff_san = 0.0;
  AccuracyHistogram histogram;
  double zero_ratio = 0.0;
};

/// Plain-text key-value lines: eff_san, distinct_low/mid/high, zero_ratio.
std::string format_summary(const SweepSummary& summary);

}  // namespace ifmsan
