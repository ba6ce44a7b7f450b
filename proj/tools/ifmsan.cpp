#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ifmsan/metrics.hpp"
#include "ifmsan/model_io.hpp"
#include "ifmsan/nn.hpp"
#include "ifmsan/privacy.hpp"
#include "ifmsan/rng.hpp"
#include "ifmsan/sanitizer.hpp"
#include "ifmsan/sweep_io.hpp"
#include "ifmsan/tensor_io.hpp"
#include "ifmsan/toy.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitBudget = 3;

struct Options {
  std::string model_path;
  std::string input_path;
  std::string layer;
  double gamma = 0.0;
  std::size_t window_from = 2;
  std::size_t window_to = 150;
  bool window_to_given = false;
  std::vector<std::string> fixed_entries;
  int precision = 6;
  std::string out_path;
  std::string dims_text;
  std::string floats_path = "-";
  std::string tensor_file;
  std::string out_dir;
  std::uint32_t seed = ifmsan::kDefaultToySeed;
  unsigned jobs = 1;
  std::size_t top_k = 5;
  std::size_t head = 8;
  double sparsity = 0.5;
};

ifmsan::Dims parse_dims(const std::string& text) {
  ifmsan::Dims dims;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t end = std::min(text.find(',', begin), text.size());
    std::uint32_t value = 0;
    const char* first = text.data() + begin;
    const char* last = text.data() + end;
    const auto [ptr, err] = std::from_chars(first, last, value);
    if (err != std::errc{} || ptr != last || value == 0) {
      throw ifmsan::ParameterError("bad dims \"" + text +
                                   "\": expected comma-separated positive integers");
    }
    dims.push_back(value);
    begin = end + 1;
  }
  return dims;
}

ifmsan::SanitizationPlan parse_plan(const std::vector<std::string>& entries) {
  ifmsan::SanitizationPlan plan;
  for (const std::string& entry : entries) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ifmsan::ParameterError("bad plan entry \"" + entry +
                                   "\": expected layer=n");
    }
    std::size_t n = 0;
    const char* first = entry.data() + eq + 1;
    const char* last = entry.data() + entry.size();
    const auto [ptr, err] = std::from_chars(first, last, n);
    if (err != std::errc{} || ptr != last) {
      throw ifmsan::ParameterError("bad plan entry \"" + entry +
                                   "\": expected layer=n");
    }
    const std::string layer = entry.substr(0, eq);
    if (plan.contains(layer)) {
      throw ifmsan::ConfigError("layer " + layer + " listed twice in the plan");
    }
    plan.set(layer, n);
  }
  return plan;
}

std::string format_fixed(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

int cmd_infer(const Options& opt) {
  const ifmsan::Model model = ifmsan::load_model(opt.model_path);
  const ifmsan::Tensor input = ifmsan::read_tensor(opt.input_path);
  const ifmsan::SanitizationPlan plan = parse_plan(opt.fixed_entries);

  const auto probabilities = ifmsan::infer(model, input, plan);
  std::vector<std::size_t> order(probabilities.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return probabilities[a] > probabilities[b];
  });
  const std::size_t count = std::min(opt.top_k, order.size());
  for (std::size_t i = 0; i < count; ++i) {
    std::cout << order[i] << ' ' << format_fixed(probabilities[order[i]]) << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const Options& opt) {
  const ifmsan::Model model = ifmsan::load_model(opt.model_path);
  const ifmsan::Tensor input = ifmsan::read_tensor(opt.input_path);
  const ifmsan::SanitizationPlan fixed = parse_plan(opt.fixed_entries);

  const auto records =
      ifmsan::multi_layer_sweep(model, input, fixed, opt.layer, opt.window_from,
                                opt.window_to, opt.jobs);
  ifmsan::write_sweep_csv(opt.out_path, records);

  ifmsan::SweepSummary summary;
  summary.eff_san = ifmsan::eff_san(records, opt.precision);
  summary.histogram = ifmsan::accuracy_histogram(records, opt.precision);
  summary.zero_ratio =
      ifmsan::zero_ratio(ifmsan::ifm_at(model, input, opt.layer, fixed));
  std::cout << ifmsan::format_summary(summary);
  return kExitOk;
}

int cmd_control(const Options& opt) {
  const ifmsan::Model model = ifmsan::load_model(opt.model_path);
  const ifmsan::Tensor input = ifmsan::read_tensor(opt.input_path);

  std::size_t n_max = opt.window_to;
  if (!opt.window_to_given) {
    // Default: the window can grow to cover the whole controlled stream.
    n_max = std::max<std::size_t>(
        2, ifmsan::ifm_at(model, input, opt.layer).size());
  }

  const ifmsan::PrivacyBudget budget{opt.gamma};
  try {
    const auto result =
        ifmsan::control_sanitize(model, input, opt.layer, budget, n_max);
    if (!opt.out_path.empty()) {
      ifmsan::write_sweep_csv(opt.out_path, result.trace);
    }
    std::cout << "window_size=" << result.window_size << '\n'
              << "p_original=" << format_fixed(result.p_original) << '\n'
              << "p_sanitized=" << format_fixed(result.p_sanitized) << '\n'
              << "observed_epsilon=" << format_fixed(result.observed_epsilon) << '\n'
              << "epsilon_lower_bound=" << format_fixed(budget.epsilon_lower())
              << '\n';
    return kExitOk;
  } catch (const ifmsan::BudgetUnreachableError& e) {
    if (!opt.out_path.empty()) {
      ifmsan::write_sweep_csv(opt.out_path, e.trace());
    }
    std::cerr << "budget unreachable: " << e.what() << '\n';
    return kExitBudget;
  }
}

int cmd_tensor_inspect(const Options& opt) {
  const ifmsan::Tensor t = ifmsan::read_tensor(opt.tensor_file);
  std::string dims_text;
  for (std::size_t i = 0; i < t.rank(); ++i) {
    if (i != 0) {
      dims_text += 'x';
    }
    dims_text += std::to_string(t.dims()[i]);
  }
  std::cout << "dims=" << dims_text << '\n'
            << "samples=" << t.size() << '\n'
            << "zero_ratio=" << format_fixed(ifmsan::zero_ratio(t)) << '\n';
  std::cout << "head=";
  const std::size_t count = std::min(opt.head, t.size());
  for (std::size_t i = 0; i < count; ++i) {
    if (i != 0) {
      std::cout << ' ';
    }
    std::cout << format_fixed(t[i]);
  }
  std::cout << '\n';
  return kExitOk;
}

int cmd_tensor_ingest(const Options& opt) {
  const ifmsan::Dims dims = parse_dims(opt.dims_text);

  std::string text;
  std::string source;
  if (opt.floats_path == "-") {
    source = "<stdin>";
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    text = buffer.str();
  } else {
    source = opt.floats_path;
    std::ifstream in(opt.floats_path);
    if (!in) {
      throw ifmsan::FormatError("float list " + source + ": cannot open");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
  }
  for (char& c : text) {
    if (c == ',') {
      c = ' ';
    }
  }

  std::vector<float> values;
  std::istringstream stream(text);
  std::string token;
  while (stream >> token) {
    try {
      std::size_t used = 0;
      values.push_back(std::stof(token, &used));
      if (used != token.size()) {
        throw std::invalid_argument(token);
      }
    } catch (const std::logic_error&) {
      throw ifmsan::FormatError("float list " + source + ": bad value \"" + token +
                                "\"");
    }
  }
  const std::size_t expected = ifmsan::element_count(dims);
  if (values.size() != expected) {
    throw ifmsan::FormatError("float list " + source + ": holds " +
                              std::to_string(values.size()) +
                              " values but dims require " +
                              std::to_string(expected));
  }
  ifmsan::write_tensor(opt.out_path, ifmsan::Tensor(dims, std::move(values)));
  std::cout << "wrote " << opt.out_path << '\n';
  return kExitOk;
}

int cmd_tensor_random(const Options& opt) {
  if (opt.sparsity < 0.0 || opt.sparsity > 1.0) {
    throw ifmsan::ParameterError("sparsity must lie in [0, 1]");
  }
  const ifmsan::Dims dims = parse_dims(opt.dims_text);
  ifmsan::ValueRng rng(opt.seed);
  std::vector<float> values(ifmsan::element_count(dims));
  for (float& v : values) {
    if (rng.uniform() < opt.sparsity) {
      v = 0.0f;
    } else {
      v = static_cast<float>(rng.uniform(-1.0, 1.0));
    }
  }
  ifmsan::write_tensor(opt.out_path, ifmsan::Tensor(dims, std::move(values)));
  std::cout << "wrote " << opt.out_path << '\n';
  return kExitOk;
}

int cmd_tensor_toy(const Options& opt) {
  const std::filesystem::path dir = opt.out_dir;
  ifmsan::save_model(ifmsan::make_toy_model(opt.seed), dir);
  ifmsan::write_tensor(dir / "input.ifmt", ifmsan::make_toy_input(opt.seed));
  std::cout << "wrote " << (dir / "model.json").string() << '\n'
            << "wrote " << (dir / "input.ifmt").string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-map sanitization toolkit"};
  app.require_subcommand(1);
  Options opt;

  auto* infer = app.add_subcommand("infer", "Run inference, optionally sanitized");
  infer->add_option("--model", opt.model_path, "Model manifest path")->required();
  infer->add_option("--input", opt.input_path, "Input tensor (IFMT)")->required();
  infer->add_option("--fixed", opt.fixed_entries,
                    "Plan entry layer=n (repeatable; n=1 is a no-op)");
  infer->add_option("--top", opt.top_k, "Classes to print")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Sweep a layer's sampling window");
  sweep->add_option("--model", opt.model_path, "Model manifest path")->required();
  sweep->add_option("--input", opt.input_path, "Input tensor (IFMT)")->required();
  sweep->add_option("--layer", opt.layer, "Layer whose input map is swept")
      ->required();
  sweep->add_option("--window-from", opt.window_from, "First window size")
      ->capture_default_str();
  sweep->add_option("--window-to", opt.window_to, "Last window size")
      ->capture_default_str();
  sweep->add_option("--fixed", opt.fixed_entries,
                    "Fixed plan entry layer=n applied at every point (repeatable)");
  sweep->add_option("--precision", opt.precision,
                    "Decimal places for probability distinctness")
      ->capture_default_str();
  sweep->add_option("--out", opt.out_path, "Sweep CSV path")
      ->default_val("sweep.csv");
  sweep->add_option("--jobs", opt.jobs, "Concurrent sweep points")
      ->capture_default_str();

  auto* control = app.add_subcommand("control", "Grow the window until gamma holds");
  control->add_option("--model", opt.model_path, "Model manifest path")->required();
  control->add_option("--input", opt.input_path, "Input tensor (IFMT)")->required();
  control->add_option("--layer", opt.layer, "Layer to sanitize")->required();
  control->add_option("--gamma", opt.gamma, "Degree of sanitization")->required();
  control->add_option("--window-to", opt.window_to,
                      "Largest window to try (default: controlled stream length)")
      ->each([&](const std::string&) { opt.window_to_given = true; });
  control->add_option("--out", opt.out_path, "Trace CSV path");

  auto* tensor = app.add_subcommand("tensor", "Inspect and produce IFMT tensors");
  tensor->require_subcommand(1);

  auto* inspect = tensor->add_subcommand("inspect", "Print dims, zero ratio, head");
  inspect->add_option("file", opt.tensor_file, "IFMT file")->required();
  inspect->add_option("--head", opt.head, "Samples to preview")
      ->capture_default_str();

  auto* ingest = tensor->add_subcommand("ingest", "Pack a float list into IFMT");
  ingest->add_option("--dims", opt.dims_text, "Dims, e.g. 3,16,16")->required();
  ingest->add_option("--out", opt.out_path, "Output IFMT path")->required();
  ingest->add_option("--floats", opt.floats_path,
                     "Text file of floats, or - for stdin")
      ->capture_default_str();

  auto* random = tensor->add_subcommand("random", "Write a seeded random tensor");
  random->add_option("--dims", opt.dims_text, "Dims, e.g. 3,16,16")->required();
  random->add_option("--out", opt.out_path, "Output IFMT path")->required();
  random->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
  random->add_option("--sparsity", opt.sparsity, "Fraction of exact zeros")
      ->capture_default_str();

  auto* toy = tensor->add_subcommand("toy", "Write the seeded demo model + input");
  toy->add_option("--out-dir", opt.out_dir, "Output directory")->required();
  toy->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(infer)) {
      return cmd_infer(opt);
    }
    if (app.got_subcommand(sweep)) {
      return cmd_sweep(opt);
    }
    if (app.got_subcommand(control)) {
      return cmd_control(opt);
    }
    if (tensor->got_subcommand(inspect)) {
      return cmd_tensor_inspect(opt);
    }
    if (tensor->got_subcommand(ingest)) {
      return cmd_tensor_ingest(opt);
    }
    if (tensor->got_subcommand(random)) {
      return cmd_tensor_random(opt);
    }
    if (tensor->got_subcommand(toy)) {
      return cmd_tensor_toy(opt);
    }
    std::cerr << "no subcommand\n";
    return kExitUsage;
  } catch (const ifmsan::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const ifmsan::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
