// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "greenwood/critical.hpp"
#include "greenwood/distributions.hpp"
#include "greenwood/hypothesis.hpp"
#include "greenwood/signal.hpp"
#include "greenwood/statistic.hpp"

namespace py = pybind11;
using namespace greenwood;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const Array& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
  return {a.data(), static_cast<std::size_t>(a.size())};
}

Array to_array(std::vector<double> v) {
  auto* holder = new std::vector<double>(std::move(v));
  py::capsule owner(holder, [](void* p) { delete static_cast<std::vector<double>*>(p); });
  return Array(holder->size(), holder->data(), owner);
}

DistributionSpec make_spec(const std::string& family, std::optional<double> param) {
  const Family f = parse_family(family);
  if (f == Family::gaussian) return DistributionSpec::gaussian();
  if (!param) throw std::invalid_argument("a tail parameter is required for " + family);
  return DistributionSpec::with_tail_parameter(f, *param);
}

py::object to_python(const nlohmann::json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "greenwood core bindings";

  py::register_exception<CoverageError>(m, "CoverageError", PyExc_LookupError);

  m.def("modified_greenwood", [](const Array& x) { return modified_greenwood(view(x)).value; },
        py::arg("x"), "S_n = sum x^2 / (sum |x|)^2");
  m.def("normalized_statistic",
        [](double s, std::size_t n) { return normalized_statistic({s, n}); }, py::arg("s"),
        py::arg("n"));
  m.def(
      "sample",
      [](const std::string& family, std::optional<double> param, std::size_t n,
         std::uint64_t seed, std::uint64_t stream) {
        return to_array(sample(make_spec(family, param), n, RngStream(seed, stream)));
      },
      py::arg("family"), py::arg("param") = py::none(), py::arg("n"), py::arg("seed") = 0,
      py::arg("stream") = 0);
  m.def("kaiser_window", [](std::size_t length, double beta) {
    return to_array(kaiser_window(length, beta));
  }, py::arg("length"), py::arg("beta") = 5.0);

  py::class_<QuantileTable, std::shared_ptr<QuantileTable>>(m, "QuantileTable")
      .def_static("load", [](const std::filesystem::path& p) {
        return std::make_shared<QuantileTable>(QuantileTable::load(p));
      })
      .def("save", &QuantileTable::save)
      .def("__len__", &QuantileTable::size)
      .def(
          "find",
          [](const QuantileTable& t, const std::string& family, std::optional<double> param,
             std::size_t n, double c, const std::string& side) {
            return t.find(make_spec(family, param), n, c, parse_side(side));
          },
          py::arg("family"), py::arg("param") = py::none(), py::arg("n"), py::arg("c"),
          py::arg("side"))
      .def("to_dict", [](const QuantileTable& t) { return to_python(t.to_json()); });

  m.def(
      "build_quantile_table",
      [](const std::string& family, std::optional<double> param, std::vector<std::size_t> sizes,
         std::vector<double> levels, const std::string& side, std::size_t replications,
         std::uint64_t seed, unsigned threads) {
        const auto spec = make_spec(family, param);
        std::vector<QuantileRequest> requests;
        for (std::size_t n : sizes) {
          for (double c : levels) requests.push_back({spec, n, c, parse_side(side)});
        }
        py::gil_scoped_release release;
        return std::make_shared<QuantileTable>(
            build_quantile_table(requests, replications, RngStream(seed, 0), threads));
      },
      py::arg("family"), py::arg("param") = py::none(), py::arg("n"), py::arg("c"),
      py::arg("side"), py::arg("replications") = kDefaultReplications, py::arg("seed") = 0,
      py::arg("threads") = 0);

  m.def(
      "test",
      [](const std::string& kind, const Array& x, std::shared_ptr<QuantileTable> table, double c,
         const std::string& null_family, std::optional<double> null_param) {
        auto spec = TestSpec::make(parse_test_kind(kind), table, c,
                                   make_spec(null_family, null_param));
        return to_python(apply_test(spec, view(x)).to_json());
      },
      py::arg("kind"), py::arg("x"), py::arg("table") = nullptr,
      py::arg("c") = kDefaultSignificance, py::arg("null") = "gaussian",
      py::arg("null_param") = py::none(), "returns the outcome as a dict");

  py::class_<Spectrogram>(m, "Spectrogram")
      .def_readonly("bins", &Spectrogram::bins)
      .def_readonly("frames", &Spectrogram::frames)
      .def_readonly("frequencies", &Spectrogram::frequencies)
      .def_readonly("times", &Spectrogram::times)
      .def_property_readonly("values", [](const Spectrogram& s) {
        Array out({s.bins, s.frames});
        std::copy(s.magnitude_squared.begin(), s.magnitude_squared.end(), out.mutable_data());
        return out;
      });
  m.def(
      "spectrogram",
      [](const Array& x, double sample_rate, std::size_t window_length, double beta,
         std::size_t overlap, std::size_t nfft) {
        Signal signal{std::vector<double>(x.data(), x.data() + view(x).size()), sample_rate};
        return spectrogram(signal, kaiser_window(window_length, beta), overlap, 0, "kaiser", nfft);
      },
      py::arg("x"), py::arg("sample_rate") = 1.0, py::arg("window_length") = 2000,
      py::arg("beta") = 5.0, py::arg("overlap") = 0, py::arg("nfft") = 0);
  m.def(
      "frequency_rows",
      [](const Spectrogram& s, double f_min, double f_max) {
        py::list out;
        for (const auto& r : frequency_rows(s, f_min, f_max)) {
          out.append(py::make_tuple(r.frequency,
                                    to_array(std::vector<double>(r.values.begin(), r.values.end()))));
        }
        return out;
      },
      py::arg("spectrogram"), py::arg("f_min"), py::arg("f_max"));
}
