// The greedy median filter, its trace artifacts, and the deviation sweep.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "medix/filter.hpp"
#include "medix/median.hpp"

namespace py = pybind11;
using namespace medix;

void bind_filter(py::module_& m) {
  py::class_<FilterConfig>(m, "FilterConfig")
      .def(py::init<>())
      .def(py::init([](double eps_stop, std::size_t k, std::size_t T) {
             return FilterConfig{eps_stop, k, T};
           }),
           py::arg("eps_stop") = 5e-3, py::arg("k") = 1, py::arg("T") = 40)
      .def_readwrite("eps_stop", &FilterConfig::eps_stop)
      .def_readwrite("k", &FilterConfig::k)
      .def_readwrite("T", &FilterConfig::T);
  m.def("default_k", &default_k, py::arg("m"));

  py::enum_<StopReason>(m, "StopReason")
      .value("converged", StopReason::converged)
      .value("max_iter", StopReason::max_iter)
      .value("exhausted", StopReason::exhausted);
  m.def("stop_reason_name", &stop_reason_name, py::arg("r"));

  py::enum_<Aggregator>(m, "Aggregator")
      .value("element_wise_median", Aggregator::element_wise_median)
      .value("geometric_median", Aggregator::geometric_median);

  py::class_<TraceRow>(m, "TraceRow")
      .def_readonly("iter", &TraceRow::iter)
      .def_readonly("d_t", &TraceRow::d_t)
      .def_readonly("delta_max", &TraceRow::delta_max)
      .def_readonly("removed", &TraceRow::removed);

  py::class_<FilterResult>(m, "FilterResult")
      .def(py::init<>())
      .def_readwrite("outlier_ids", &FilterResult::outlier_ids)
      .def_readwrite("survivor_ids", &FilterResult::survivor_ids)
      .def_readonly("trace", &FilterResult::trace)
      .def_readwrite("stop_reason", &FilterResult::stop_reason);

  m.def("medix_filter",
        [](const Matrix& gradients, const Vec& ref_grad, const FilterConfig& cfg,
           Aggregator agg, unsigned threads) {
          return medix_filter(gradients, ref_grad, cfg, agg, threads);
        },
        py::arg("gradients"), py::arg("ref_grad"), py::arg("cfg"),
        py::arg("agg") = Aggregator::element_wise_median, py::arg("threads") = 1);
  m.def("medix_filter",
        [](const WildSet& wild, const Vec& ref_grad, const FilterConfig& cfg,
           Aggregator agg, unsigned threads) {
          return medix_filter(wild, ref_grad, cfg, agg, threads);
        },
        py::arg("wild"), py::arg("ref_grad"), py::arg("cfg"),
        py::arg("agg") = Aggregator::element_wise_median, py::arg("threads") = 1);

  py::class_<ErrRates>(m, "ErrRates")
      .def_readonly("err_in", &ErrRates::err_in)
      .def_readonly("err_out", &ErrRates::err_out);
  m.def("err_rates", &err_rates, py::arg("result"), py::arg("wild"));

  py::class_<DeviationPoint>(m, "DeviationPoint")
      .def_readonly("n_ood", &DeviationPoint::n_ood)
      .def_readonly("deviation", &DeviationPoint::deviation);
  m.def("deviation_sweep",
        [](const WildSet& ind_pool, const WildSet& ood_pool, const Vec& ref_grad,
           const std::vector<std::size_t>& steps) {
          return deviation_sweep(ind_pool, ood_pool, ref_grad, steps);
        },
        py::arg("ind_pool"), py::arg("ood_pool"), py::arg("ref_grad"), py::arg("steps"));

  m.def("write_filter_json", &write_filter_json, py::arg("result"), py::arg("path"));
  m.def("write_trace_csv", &write_trace_csv, py::arg("result"), py::arg("path"));
  m.def("read_filter_json", &read_filter_json, py::arg("path"));
}
