#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "faithlab/attributions.hpp"
#include "faithlab/baselines.hpp"
#include "faithlab/dataset.hpp"
#include "faithlab/fft.hpp"
#include "faithlab/harness.hpp"
#include "faithlab/metrics.hpp"
#include "faithlab/models.hpp"
#include "faithlab/theory.hpp"

namespace py = pybind11;
using namespace faithlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  if (shape.empty()) shape = {1};
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  return Array(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()), t.values().data());
}

Array to_array(const std::vector<double>& v) {
  return Array(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())}, v.data());
}

// Held by value so the variant is not converted element-wise by the STL casters.
struct ModelHandle {
  Model model;
};

std::vector<double> flat(const Array& a) { return std::vector<double>(a.data(), a.data() + a.size()); }

AttributionConfig attribution_config(const py::dict& options) {
  AttributionConfig cfg;
  for (auto [key, value] : options) {
    const auto name = key.cast<std::string>();
    if (name == "seed") cfg.seed = value.cast<std::uint64_t>();
    else if (name == "ig_steps") cfg.ig_steps = value.cast<std::size_t>();
    else if (name == "smoothgrad_samples") cfg.smoothgrad_samples = value.cast<std::size_t>();
    else if (name == "smoothgrad_sigma") cfg.smoothgrad_sigma = value.cast<double>();
    else if (name == "occlusion_patch") cfg.occlusion_patch = value.cast<std::size_t>();
    else if (name == "rise_masks") cfg.rise_masks = value.cast<std::size_t>();
    else if (name == "rise_probability") cfg.rise_probability = value.cast<double>();
    else throw py::key_error("unknown attribution option '" + name + "'");
  }
  return cfg;
}

py::dict trace_dict(const MetricTrace& trace) {
  py::dict out;
  out["fractions"] = to_array(trace.fractions());
  out["scores"] = to_array(trace.scores());
  out["auc"] = trace.auc;
  out["target"] = trace.target;
  return out;
}

TheoryInstance instance(const std::vector<double>& x, const std::vector<double>& w, double bias,
                        const std::string& regime) {
  TheoryInstance inst{x, w, bias, Regime::kZero};
  if (regime == "uniform") inst.regime = Regime::kUniformExpected;
  else if (regime != "zero") throw py::value_error("regime must be 'zero' or 'uniform'");
  inst.validate();
  return inst;
}

}  // namespace

PYBIND11_MODULE(_faithlab, m) {
  m.doc() = "Attribution methods, removal baselines and faithfulness metrics";

  py::class_<ModelHandle>(m, "Model")
      .def_property_readonly("input_dim", [](const ModelHandle& h) { return input_dim(h.model); })
      .def_property_readonly("classes", [](const ModelHandle& h) { return class_count(h.model); })
      .def("to_json", [](const ModelHandle& h) { return model_to_json(h.model); });

  m.def(
      "linear_model",
      [](const std::vector<double>& w, double b) {
        LinearModel lin{w, b};
        lin.validate();
        return ModelHandle{lin};
      },
      py::arg("weights"), py::arg("bias") = 0.0);
  m.def("load_model", [](const std::filesystem::path& path) { return ModelHandle{load_model(path)}; });
  m.def("model_from_json", [](const std::string& text) { return ModelHandle{model_from_json(text)}; });
  m.def("predict", [](const ModelHandle& h, const Array& x) { return to_array(predict(h.model, flat(x))); });
  m.def("predicted_class", [](const ModelHandle& h, const Array& x) { return predicted_class(h.model, flat(x)); });

  m.def("load_idx", [](const std::filesystem::path& path) -> py::object {
    auto content = load_idx(path);
    if (auto* images = std::get_if<Tensor>(&content)) return to_array(*images);
    return py::cast(std::get<std::vector<std::size_t>>(content));
  });

  m.def(
      "explain",
      [](const std::string& method, const ModelHandle& h, const Array& x, const py::kwargs& options) {
        const auto e = explain(parse_method(method), h.model, flat(x), attribution_config(options));
        return py::make_tuple(to_array(e.scores), e.ordering);
      },
      py::arg("method"), py::arg("model"), py::arg("x"));
  m.def(
      "linear_closed_form",
      [](const std::string& method, const std::vector<double>& w, double b, const std::vector<double>& x, double q) {
        return to_array(linear_closed_form(parse_method(method), w, b, x, q).scores);
      },
      py::arg("method"), py::arg("weights"), py::arg("bias"), py::arg("x"), py::arg("q") = 0.5);
  m.attr("methods") = [] {
    std::vector<std::string> names;
    for (auto method : kAllMethods) names.emplace_back(method_name(method));
    return names;
  }();
  m.attr("baselines") = [] {
    std::vector<std::string> names;
    for (auto kind : kAllBaselines) names.emplace_back(baseline_name(kind));
    return names;
  }();

  m.def(
      "baseline_image",
      [](const std::string& kind, const Array& x, double mean, double median, std::uint64_t seed) {
        const auto ctx = build_context(parse_baseline(kind), to_tensor(x), DatasetStats{mean, median}, seed);
        return to_array(ctx.replacement);
      },
      py::arg("kind"), py::arg("x"), py::arg("mean") = 0.0, py::arg("median") = 0.0, py::arg("seed") = 0);

  auto trace = [](bool deletion) {
    return [deletion](const ModelHandle& h, const Array& x, const Array& scores, const std::string& baseline,
                      std::size_t steps, const std::string& mode, std::uint64_t seed) {
      const Tensor image = to_tensor(x);
      const auto ctx = build_context(parse_baseline(baseline), image, DatasetStats{}, seed);
      MetricConfig cfg;
      cfg.steps = steps;
      if (mode == "logit") cfg.mode = ScoreMode::kLogit;
      else if (mode != "softmax") throw py::value_error("mode must be 'softmax' or 'logit'");
      const auto explanation = Explanation::from_scores(flat(scores));
      return trace_dict(deletion ? deletion_trace(h.model, image, explanation, ctx, cfg)
                                 : insertion_trace(h.model, image, explanation, ctx, cfg));
    };
  };
  m.def("deletion_trace", trace(true), py::arg("model"), py::arg("x"), py::arg("scores"),
        py::arg("baseline") = "zero", py::arg("steps") = 0, py::arg("mode") = "softmax", py::arg("seed") = 0);
  m.def("insertion_trace", trace(false), py::arg("model"), py::arg("x"), py::arg("scores"),
        py::arg("baseline") = "zero", py::arg("steps") = 0, py::arg("mode") = "softmax", py::arg("seed") = 0);
  m.def("auc", [](const std::vector<double>& f, const std::vector<double>& s) { return auc(f, s); });
  m.def(
      "auc_concentration",
      [](const std::vector<double>& f, const std::vector<double>& s, double share) {
        const auto c = auc_concentration(f, s, share);
        return py::make_tuple(c.fraction, c.undefined);
      },
      py::arg("fractions"), py::arg("scores"), py::arg("share") = 0.8);
  m.def("kendall_tau", [](const std::vector<double>& a, const std::vector<double>& b) { return kendall_tau(a, b); });

  m.def("rfft2", [](const Array& image) {
    const auto spectrum = rfft2(to_tensor(image));
    py::array_t<std::complex<double>> out({spectrum.height(), spectrum.half_width()});
    std::copy(spectrum.coefficients().begin(), spectrum.coefficients().end(), out.mutable_data());
    return out;
  });
  m.def("irfft2", [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& half,
                     std::size_t width) {
    if (half.ndim() != 2) throw py::value_error("irfft2 expects a 2-D half-plane spectrum");
    const auto height = static_cast<std::size_t>(half.shape(0));
    Spectrum spectrum(height, width, std::vector<Complex>(half.data(), half.data() + half.size()));
    return to_array(irfft2(spectrum));
  });

  m.def(
      "exact_deletion_sum",
      [](const std::vector<double>& x, const std::vector<double>& w, double b, const std::vector<std::size_t>& order,
         const std::string& regime) { return exact_deletion_sum(instance(x, w, b, regime), order); },
      py::arg("x"), py::arg("w"), py::arg("bias"), py::arg("ordering"), py::arg("regime") = "zero");
  m.def(
      "exact_insertion_sum",
      [](const std::vector<double>& x, const std::vector<double>& w, double b, const std::vector<std::size_t>& order,
         const std::string& regime) { return exact_insertion_sum(instance(x, w, b, regime), order); },
      py::arg("x"), py::arg("w"), py::arg("bias"), py::arg("ordering"), py::arg("regime") = "zero");
  m.def(
      "optimal_orderings",
      [](const std::vector<double>& x, const std::vector<double>& w, double b, const std::string& regime) {
        const auto verdict = brute_force_optimal(instance(x, w, b, regime));
        py::dict out;
        out["deletion"] = verdict.deletion_optima;
        out["deletion_value"] = verdict.deletion_value;
        out["insertion"] = verdict.insertion_optima;
        out["insertion_value"] = verdict.insertion_value;
        return out;
      },
      py::arg("x"), py::arg("w"), py::arg("bias"), py::arg("regime") = "zero");
}
