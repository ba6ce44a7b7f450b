#include "ifmsan/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "ifmsan/errors.hpp"

namespace ifmsan {
namespace {

std::int64_t pow10_int(int exponent) {
  std::int64_t value = 1;
  for (int i = 0; i < exponent; ++i) {
    value *= 10;
  }
  return value;
}

int checked_precision(int distinctness_precision) {
  if (distinctness_precision < 0 || distinctness_precision > 9) {
    throw ParameterError("distinctness precision must be in [0, 9]");
  }
  return distinctness_precision;
}

/// Probability rounded to `precision` decimals, as an integer numerator over
/// 10^precision. Keys compare exactly, so distinctness and banding never
/// depend on float equality.
std::int64_t rounding_key(double probability, std::int64_t scale) {
  if (!(probability >= 0.0) || probability > 1.0) {
    throw ParameterError("probabilities must lie in [0, 1]");
  }
  return std::llround(probability * static_cast<double>(scale));
}

std::set<std::int64_t> distinct_keys(std::span<const SweepRecord> records,
                                     std::int64_t scale) {
  std::set<std::int64_t> keys;
  for (const auto& record : records) {
    keys.insert(rounding_key(record.probability, scale));
  }
  return keys;
}

void check_sweep_range(std::span<const SweepRecord> records) {
  if (records.empty()) {
    throw ParameterError("sweep records are empty");
  }
  if (records.front().window_size < 2) {
    throw ParameterError("sweep window sizes start at 2");
  }
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].window_size != records[i - 1].window_size + 1) {
      throw ParameterError("sweep records must cover a contiguous window range");
    }
  }
}

std::vector<SweepRecord> run_sweep(const Model& model, const Tensor& input,
                                   const SanitizationPlan& fixed_plan,
                                   const std::string& swept_layer,
                                   std::size_t n_from, std::size_t n_to,
                                   unsigned jobs) {
  if (n_from < 2 || n_from > n_to) {
    throw ParameterError("window range must satisfy 2 <= n_from <= n_to");
  }
  if (fixed_plan.contains(swept_layer)) {
    throw ConfigError("swept layer " + swept_layer + " already has a fixed window");
  }
  if (model.find(swept_layer) == nullptr) {
    throw ConfigError("model has no layer named " + swept_layer);
  }

  // The tracked class comes from the fully unsanitized inference.
  const auto original = infer(model, input, {});
  const std::size_t tracked = top_class(original).index;

  const std::size_t points = n_to - n_from + 1;
  std::vector<SweepRecord> records(points);
  const auto evaluate = [&](std::size_t i) {
    const std::size_t n = n_from + i;
    SanitizationPlan plan = fixed_plan;
    plan.set(swept_layer, n);
    const auto probabilities = infer(model, input, plan);
    records[i] = SweepRecord{n, static_cast<double>(probabilities[tracked])};
  };

  const std::size_t workers = std::min<std::size_t>(jobs == 0 ? 1 : jobs, points);
  if (workers == 1) {
    for (std::size_t i = 0; i < points; ++i) {
      evaluate(i);
    }
    return records;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= points) {
          return;
        }
        try {
          evaluate(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) {
            first_error = std::current_exception();
          }
          failed.store(true, std::memory_order_relaxed);
          return;
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
  return records;
}

}  // namespace

std::vector<SweepRecord> sweep(const Model& model, const Tensor& input,
                               const std::string& layer, std::size_t n_from,
                               std::size_t n_to, unsigned jobs) {
  return run_sweep(model, input, SanitizationPlan{}, layer, n_from, n_to, jobs);
}

std::vector<SweepRecord> multi_layer_sweep(const Model& model, const Tensor& input,
                                           const SanitizationPlan& fixed_plan,
                                           const std::string& swept_layer,
                                           std::size_t n_from, std::size_t n_to,
                                           unsigned jobs) {
  return run_sweep(model, input, fixed_plan, swept_layer, n_from, n_to, jobs);
}

double eff_san(std::span<const SweepRecord> records, int distinctness_precision) {
  check_sweep_range(records);
  const std::int64_t scale = pow10_int(checked_precision(distinctness_precision));
  const auto keys = distinct_keys(records, scale);
  return static_cast<double>(keys.size()) / static_cast<double>(records.size());
}

AccuracyHistogram accuracy_histogram(std::span<const SweepRecord> records,
                                     int distinctness_precision) {
  if (records.empty()) {
    throw ParameterError("sweep records are empty");
  }
  const std::int64_t scale = pow10_int(checked_precision(distinctness_precision));
  AccuracyHistogram histogram;
  for (std::int64_t key : distinct_keys(records, scale)) {
    // key/scale <= 0.2 and 0.8 as exact rational comparisons.
    if (key * 5 <= scale) {
      ++histogram.low;
    } else if (key * 5 <= 4 * scale) {
      ++histogram.mid;
    } else {
      ++histogram.high;
    }
  }
  return histogram;
}

std::optional<std::size_t> attenuation_threshold(std::span<const SweepRecord> records,
                                                 double threshold) {
  if (!(threshold > 0.0) || !(threshold < 1.0)) {
    throw ParameterError("attenuation threshold must lie in (0, 1)");
  }
  std::optional<std::size_t> settled;
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->probability < threshold) {
      settled = it->window_size;
    } else {
      break;
    }
  }
  return settled;
}

}  // namespace ifmsan
