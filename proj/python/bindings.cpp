// Thin Python layer: configs and reports cross the boundary as JSON text,
// matrices as NumPy arrays.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kreinlab/config.hpp"
#include "kreinlab/convergence_lab.hpp"
#include "kreinlab/errors.hpp"
#include "kreinlab/matrix_oracle.hpp"
#include "kreinlab/report_io.hpp"
#include "kreinlab/schrodinger.hpp"
#include "kreinlab/spectral.hpp"

namespace py = pybind11;
using namespace kreinlab;

namespace {

ExperimentConfig config_of(const std::string& json_text) {
  return json_text.empty() ? ExperimentConfig{} : config_from_json(nlohmann::json::parse(json_text));
}

std::string report_json(const lab::ConvergenceReport& report) {
  nlohmann::json j = report::sidecar(report);
  j["csv"] = report::to_csv(report);
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "kreinlab native core";
  m.attr("__version__") = report::library_version();

  static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const NumericalError& e) {
      PyErr_SetString(numerical.ptr(), (e.kind() + ": " + e.what()).c_str());
    }
  });

  m.def("default_config", [] { return to_json(ExperimentConfig{}).dump(); });
  m.def("parse_config", [](const std::string& text) { return to_json(parse_config(text)).dump(); }, py::arg("text"));
  m.def("config_hash", [](const std::string& json_text) { return config_hash(config_of(json_text)); },
        py::arg("config_json"));

  m.def(
      "form_bound",
      [](double half_length, int k_per_side, double grading_exponent, double kappa, double beta) {
        const auto mesh = schrodinger::build_mesh(half_length, k_per_side, grading_exponent);
        const auto bound = schrodinger::estimate_form_bound(mesh, schrodinger::SingularPotential::power_law(kappa, beta));
        return py::dict(py::arg("a") = bound.a, py::arg("b") = bound.b, py::arg("alpha_max") = bound.alpha_max,
                        py::arg("trade_off") = bound.trade_off);
      },
      py::arg("half_length"), py::arg("k_per_side"), py::arg("grading_exponent"), py::arg("kappa"), py::arg("beta"));

  m.def(
      "lowest_eigenvalues",
      [](const std::string& config_json, const std::string& spec, double n, int k) {
        const lab::Experiment ex(config_of(config_json));
        const auto op = n > 0.0 ? ex.sequence_operator(spec, n) : ex.base(spec);
        return Vector(lowest_eigenpairs(op, k).values);
      },
      py::arg("config_json"), py::arg("spec"), py::arg("n") = 0.0, py::arg("k") = 3,
      "Lowest k eigenvalues of the extension `spec`, cut off at level n (n <= 0: unperturbed).");

  m.def(
      "run_convergence", [](const std::string& c) { return report_json(lab::run_convergence(config_of(c))); },
      py::arg("config_json"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_admissibility", [](const std::string& c) { return report_json(lab::run_admissibility(config_of(c))); },
      py::arg("config_json"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_spectrum_tracking",
      [](const std::string& c, int k) { return report_json(lab::run_spectrum_tracking(config_of(c), k)); },
      py::arg("config_json"), py::arg("k") = 3, py::call_guard<py::gil_scoped_release>());

  m.def(
      "oracle_suite",
      [](int seeds, int dim, int codim, int general_specs) {
        const auto result = oracle::run_suite(seeds, dim, codim, general_specs, lab::worker_threads());
        return py::dict(py::arg("instances") = result.instances, py::arg("verifications") = result.verifications,
                        py::arg("redraws") = result.redraws,
                        py::arg("failures") = oracle::to_json_lines(result.failures));
      },
      py::arg("seeds") = 100, py::arg("dim") = 8, py::arg("codim") = 2, py::arg("general_specs") = 3);
}
