// Closed-form error bounds and the Monte-Carlo coverage harness.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "medix/bounds.hpp"

namespace py = pybind11;
using namespace medix;

void bind_bounds(py::module_& m) {
  py::class_<BoundInputs>(m, "BoundInputs")
      .def(py::init<>())
      .def(py::init([](double sigma, double sigma_out, double mu4, double pi, std::size_t m,
                       std::size_t d, double delta, double Delta, double eps_dev) {
             return BoundInputs{sigma, sigma_out, mu4, pi, m, d, delta, Delta, eps_dev};
           }),
           py::arg("sigma") = 1.0, py::arg("sigma_out") = 1.0, py::arg("mu4") = 3.0,
           py::arg("pi") = 0.5, py::arg("m") = 0, py::arg("d") = 0, py::arg("delta") = 0.1,
           py::arg("Delta") = 0.0, py::arg("eps_dev") = 0.0)
      .def_readwrite("sigma", &BoundInputs::sigma)
      .def_readwrite("sigma_out", &BoundInputs::sigma_out)
      .def_readwrite("mu4", &BoundInputs::mu4)
      .def_readwrite("pi", &BoundInputs::pi)
      .def_readwrite("m", &BoundInputs::m)
      .def_readwrite("d", &BoundInputs::d)
      .def_readwrite("delta", &BoundInputs::delta)
      .def_readwrite("Delta", &BoundInputs::Delta)
      .def_readwrite("eps_dev", &BoundInputs::eps_dev);

  py::class_<BoundValue>(m, "BoundValue")
      .def_readonly("value", &BoundValue::value)
      .def_readonly("vacuous", &BoundValue::vacuous);

  py::enum_<BoundKind>(m, "BoundKind")
      .value("inlier", BoundKind::inlier)
      .value("inlier_heavy_tail", BoundKind::inlier_heavy_tail)
      .value("outlier", BoundKind::outlier);
  m.def("bound_kind_name", &bound_kind_name, py::arg("k"));
  m.def("parse_bound_kind", &parse_bound_kind, py::arg("name"));

  m.def("default_epsilon", &default_epsilon, py::arg("sigma"), py::arg("d"), py::arg("m_in"));
  m.def("inlier_bound", &inlier_bound, py::arg("inputs"));
  m.def("inlier_bound_proof_form", &inlier_bound_proof_form, py::arg("inputs"));
  m.def("outlier_bound", &outlier_bound, py::arg("inputs"));
  m.def("inlier_bound_heavy_tail", &inlier_bound_heavy_tail, py::arg("inputs"));
  m.def("estimate_sigma", &estimate_sigma, py::arg("gradients"));
  m.def("split_m_in", &split_m_in, py::arg("pi"), py::arg("m"));

  py::class_<CoverageScenario>(m, "CoverageScenario")
      .def(py::init<>())
      .def_readwrite("sigma", &CoverageScenario::sigma)
      .def_readwrite("tail", &CoverageScenario::tail)
      .def_readwrite("nu", &CoverageScenario::nu)
      .def_readwrite("pi", &CoverageScenario::pi)
      .def_readwrite("m", &CoverageScenario::m)
      .def_readwrite("d", &CoverageScenario::d)
      .def_readwrite("Delta", &CoverageScenario::Delta)
      .def_readwrite("delta", &CoverageScenario::delta)
      .def_readwrite("eps_dev", &CoverageScenario::eps_dev)
      .def_readwrite("policy", &CoverageScenario::policy);
  m.def("coverage_policy", &coverage_policy, py::arg("scn"));

  py::class_<TrialRecord>(m, "TrialRecord")
      .def_readonly("trial", &TrialRecord::trial)
      .def_readonly("err_in", &TrialRecord::err_in)
      .def_readonly("err_out", &TrialRecord::err_out)
      .def_readonly("bound", &TrialRecord::bound)
      .def_readonly("within", &TrialRecord::within);

  py::class_<CoverageResult>(m, "CoverageResult")
      .def_readonly("coverage", &CoverageResult::coverage)
      .def_readonly("bound", &CoverageResult::bound)
      .def_readonly("records", &CoverageResult::records);

  m.def("monte_carlo_coverage", &monte_carlo_coverage, py::arg("scn"), py::arg("kind"),
        py::arg("trials"), py::arg("seed"), py::arg("threads") = 1);
  m.def("write_coverage_csv", &write_coverage_csv, py::arg("records"), py::arg("path"));
}
