#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "ifmsan/metrics.hpp"
#include "ifmsan/model_io.hpp"
#include "ifmsan/nn.hpp"
#include "ifmsan/privacy.hpp"
#include "ifmsan/sanitizer.hpp"
#include "ifmsan/sweep_io.hpp"
#include "ifmsan/tensor_io.hpp"
#include "ifmsan/toy.hpp"

namespace py = pybind11;

namespace {

ifmsan::Tensor tensor_from_array(const py::array& array) {
  const auto contiguous = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(array);
  if (!contiguous) {
    throw ifmsan::ParameterError("expected an array convertible to float32");
  }
  ifmsan::Dims dims;
  for (py::ssize_t i = 0; i < contiguous.ndim(); ++i) {
    const py::ssize_t extent = contiguous.shape(i);
    if (extent <= 0) {
      throw ifmsan::DimensionError("array extents must be positive");
    }
    dims.push_back(static_cast<std::uint32_t>(extent));
  }
  std::vector<float> values(static_cast<std::size_t>(contiguous.size()));
  std::memcpy(values.data(), contiguous.data(), values.size() * sizeof(float));
  return ifmsan::Tensor(std::move(dims), std::move(values));
}

py::array_t<float> tensor_to_array(const ifmsan::Tensor& tensor) {
  std::vector<py::ssize_t> shape;
  for (const std::uint32_t extent : tensor.dims()) {
    shape.push_back(static_cast<py::ssize_t>(extent));
  }
  py::array_t<float> array(shape);
  std::memcpy(array.mutable_data(), tensor.values().data(),
              tensor.size() * sizeof(float));
  return array;
}

ifmsan::SanitizationPlan plan_from_dict(const py::dict& entries) {
  ifmsan::SanitizationPlan plan;
  for (const auto& item : entries) {
    plan.set(py::cast<std::string>(item.first), py::cast<std::size_t>(item.second));
  }
  return plan;
}

py::array_t<float> array_from(std::span<const float> values) {
  py::array_t<float> out({static_cast<py::ssize_t>(values.size())});
  std::memcpy(out.mutable_data(), values.data(), values.size() * sizeof(float));
  return out;
}

py::dict plan_to_dict(const ifmsan::SanitizationPlan& plan) {
  py::dict out;
  for (const auto& [layer, n] : plan.entries()) {
    out[py::str(layer)] = n;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Feature-map sanitization toolkit";

  const py::object value_error = py::reinterpret_borrow<py::object>(PyExc_ValueError);
  static py::exception<ifmsan::BudgetUnreachableError> budget_error(
      m, "BudgetUnreachableError", PyExc_RuntimeError);
  py::register_exception<ifmsan::DimensionError>(m, "DimensionError",
                                                 value_error.ptr());
  py::register_exception<ifmsan::ParameterError>(m, "ParameterError",
                                                 value_error.ptr());
  py::register_exception<ifmsan::ConfigError>(m, "ConfigError", value_error.ptr());
  py::register_exception<ifmsan::FormatError>(m, "FormatError", PyExc_RuntimeError);

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) {
        std::rethrow_exception(p);
      }
    } catch (const ifmsan::BudgetUnreachableError& e) {
      py::set_error(budget_error, e.what());
    }
  });

  py::class_<ifmsan::Tensor>(m, "Tensor")
      .def(py::init(&tensor_from_array), py::arg("array"))
      .def_property_readonly("dims",
                             [](const ifmsan::Tensor& t) { return t.dims(); })
      .def_property_readonly("size", &ifmsan::Tensor::size)
      .def("numpy", &tensor_to_array)
      .def("__len__", &ifmsan::Tensor::size)
      .def("__repr__", [](const ifmsan::Tensor& t) {
        std::string text = "Tensor(dims=[";
        for (std::size_t i = 0; i < t.rank(); ++i) {
          if (i != 0) {
            text += ", ";
          }
          text += std::to_string(t.dims()[i]);
        }
        return text + "])";
      });

  m.def("unfold",
        [](const ifmsan::Tensor& t) { return array_from(ifmsan::unfold(t)); });
  m.def("fold", [](const py::array& flat, const ifmsan::Dims& dims) {
    return ifmsan::fold(tensor_from_array(flat).values(), dims);
  });
  m.def("zero_ratio", [](const ifmsan::Tensor& t) { return ifmsan::zero_ratio(t); });

  m.def("read_tensor",
        [](const std::filesystem::path& path) { return ifmsan::read_tensor(path); });
  m.def("write_tensor", [](const std::filesystem::path& path,
                           const ifmsan::Tensor& t) { ifmsan::write_tensor(path, t); });

  m.def("sanitize_window", [](const py::array& window) {
    auto tensor = tensor_from_array(window);
    std::vector<float> values(tensor.values().begin(), tensor.values().end());
    ifmsan::sanitize_window(values);
    return array_from(values);
  });
  m.def("sanitize_stream", [](const py::array& stream, std::size_t n) {
    const auto tensor = tensor_from_array(stream);
    return array_from(ifmsan::sanitize_stream(tensor.values(), n));
  });
  m.def("sanitize_ifm", &ifmsan::sanitize_ifm, py::arg("tensor"), py::arg("n"));

  py::class_<ifmsan::Model>(m, "Model")
      .def_property_readonly("input_dims",
                             [](const ifmsan::Model& m_) { return m_.input_dims; })
      .def_property_readonly("layer_names", [](const ifmsan::Model& m_) {
        std::vector<std::string> names;
        for (const auto& layer : m_.layers) {
          names.push_back(layer.name);
        }
        return names;
      });

  m.def("load_model",
        [](const std::filesystem::path& path) { return ifmsan::load_model(path); });
  m.def("save_model",
        [](const ifmsan::Model& model, const std::filesystem::path& dir) {
          ifmsan::save_model(model, dir);
        });
  m.def("make_toy_model", &ifmsan::make_toy_model,
        py::arg("seed") = ifmsan::kDefaultToySeed);
  m.def("make_toy_input", &ifmsan::make_toy_input,
        py::arg("seed") = ifmsan::kDefaultToySeed);

  m.def(
      "infer",
      [](const ifmsan::Model& model, const ifmsan::Tensor& input,
         const py::dict& plan) {
        return ifmsan::infer(model, input, plan_from_dict(plan));
      },
      py::arg("model"), py::arg("input"), py::arg("plan") = py::dict());
  m.def(
      "ifm_at",
      [](const ifmsan::Model& model, const ifmsan::Tensor& input,
         const std::string& layer, const py::dict& plan) {
        return ifmsan::ifm_at(model, input, layer, plan_from_dict(plan));
      },
      py::arg("model"), py::arg("input"), py::arg("layer"),
      py::arg("plan") = py::dict());
  m.def("top_class", [](const std::vector<float>& probabilities) {
    const auto top = ifmsan::top_class(probabilities);
    return py::make_tuple(top.index, top.probability);
  });

  m.def("epsilon_lower_bound", &ifmsan::epsilon_lower_bound, py::arg("gamma"));
  m.def("meets_degree", &ifmsan::meets_degree, py::arg("p_original"),
        py::arg("p_sanitized"), py::arg("gamma"));
  m.def("observed_privacy_loss", &ifmsan::observed_privacy_loss,
        py::arg("p_original"), py::arg("p_sanitized"));

  py::class_<ifmsan::SweepRecord>(m, "SweepRecord")
      .def_readonly("window_size", &ifmsan::SweepRecord::window_size)
      .def_readonly("probability", &ifmsan::SweepRecord::probability)
      .def("__repr__", [](const ifmsan::SweepRecord& r) {
        return "SweepRecord(window_size=" + std::to_string(r.window_size) +
               ", probability=" + std::to_string(r.probability) + ")";
      });

  py::class_<ifmsan::AccuracyHistogram>(m, "AccuracyHistogram")
      .def_readonly("low", &ifmsan::AccuracyHistogram::low)
      .def_readonly("mid", &ifmsan::AccuracyHistogram::mid)
      .def_readonly("high", &ifmsan::AccuracyHistogram::high)
      .def("__repr__", [](const ifmsan::AccuracyHistogram& h) {
        return "AccuracyHistogram(low=" + std::to_string(h.low) +
               ", mid=" + std::to_string(h.mid) +
               ", high=" + std::to_string(h.high) + ")";
      });

  py::class_<ifmsan::ControlResult>(m, "ControlResult")
      .def_readonly("window_size", &ifmsan::ControlResult::window_size)
      .def_readonly("p_original", &ifmsan::ControlResult::p_original)
      .def_readonly("p_sanitized", &ifmsan::ControlResult::p_sanitized)
      .def_readonly("observed_epsilon", &ifmsan::ControlResult::observed_epsilon)
      .def_readonly("trace", &ifmsan::ControlResult::trace);

  m.def(
      "control_sanitize",
      [](const ifmsan::Model& model, const ifmsan::Tensor& input,
         const std::string& layer, double gamma, std::size_t n_max) {
        return ifmsan::control_sanitize(model, input, layer,
                                        ifmsan::PrivacyBudget{gamma}, n_max);
      },
      py::arg("model"), py::arg("input"), py::arg("layer"), py::arg("gamma"),
      py::arg("n_max"));

  m.def(
      "sweep",
      [](const ifmsan::Model& model, const ifmsan::Tensor& input,
         const std::string& layer, std::size_t n_from, std::size_t n_to,
         unsigned jobs) {
        return ifmsan::sweep(model, input, layer, n_from, n_to, jobs);
      },
      py::arg("model"), py::arg("input"), py::arg("layer"), py::arg("n_from"),
      py::arg("n_to"), py::arg("jobs") = 1);
  m.def(
      "multi_layer_sweep",
      [](const ifmsan::Model& model, const ifmsan::Tensor& input,
         const py::dict& fixed_plan, const std::string& layer, std::size_t n_from,
         std::size_t n_to, unsigned jobs) {
        return ifmsan::multi_layer_sweep(model, input, plan_from_dict(fixed_plan),
                                         layer, n_from, n_to, jobs);
      },
      py::arg("model"), py::arg("input"), py::arg("fixed_plan"), py::arg("layer"),
      py::arg("n_from"), py::arg("n_to"), py::arg("jobs") = 1);

  m.def(
      "eff_san",
      [](const std::vector<ifmsan::SweepRecord>& records, int precision) {
        return ifmsan::eff_san(records, precision);
      },
      py::arg("records"), py::arg("precision") = 6);
  m.def(
      "accuracy_histogram",
      [](const std::vector<ifmsan::SweepRecord>& records, int precision) {
        return ifmsan::accuracy_histogram(records, precision);
      },
      py::arg("records"), py::arg("precision") = 6);
  m.def(
      "attenuation_threshold",
      [](const std::vector<ifmsan::SweepRecord>& records, double threshold)
          -> std::optional<std::size_t> {
        return ifmsan::attenuation_threshold(records, threshold);
      },
      py::arg("records"), py::arg("threshold"));

  m.def("write_sweep_csv",
        [](const std::filesystem::path& path,
           const std::vector<ifmsan::SweepRecord>& records) {
          ifmsan::write_sweep_csv(path, records);
        });
  m.def("read_sweep_csv", [](const std::filesystem::path& path) {
    return ifmsan::read_sweep_csv(path);
  });

  m.def("plan_normalized", [](const py::dict& entries) {
    return plan_to_dict(plan_from_dict(entries));
  });
}
