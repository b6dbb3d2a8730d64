// Synthetic worlds: the 2-D Gaussian mixture and the raw gradient simulators.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "medix/synth.hpp"

namespace py = pybind11;
using namespace medix;

void bind_synth(py::module_& m) {
  py::class_<MixtureSpec>(m, "MixtureSpec")
      .def(py::init<>())
      .def_readwrite("class_means", &MixtureSpec::class_means)
      .def_readwrite("cov_scale", &MixtureSpec::cov_scale)
      .def_readwrite("ood_mean", &MixtureSpec::ood_mean)
      .def_readwrite("ood_cov_scale", &MixtureSpec::ood_cov_scale)
      .def_readwrite("n_per_class", &MixtureSpec::n_per_class)
      .def_readwrite("n_ood", &MixtureSpec::n_ood)
      .def_readwrite("seed", &MixtureSpec::seed);
  m.def("default_mixture_spec", &default_mixture_spec, py::arg("seed") = 0);

  py::class_<GaussianWorld>(m, "GaussianWorld")
      .def_readonly("train", &GaussianWorld::train)
      .def_readonly("wild", &GaussianWorld::wild);
  m.def("gaussian_world", &gaussian_world, py::arg("spec"));

  m.def("make_wild", &make_wild, py::arg("ind_pool"), py::arg("ood_pool"), py::arg("pi"),
        py::arg("m"), py::arg("seed"));

  py::enum_<Tail>(m, "Tail")
      .value("gaussian", Tail::gaussian)
      .value("student_t", Tail::student_t);

  py::class_<GradientWorld>(m, "GradientWorld")
      .def_readonly("gradients", &GradientWorld::gradients)
      .def_readonly("origin", &GradientWorld::origin)
      .def_readonly("mu_out", &GradientWorld::mu_out);
  m.def("simulate_gradient_world", &simulate_gradient_world, py::arg("mu_in"),
        py::arg("sigma"), py::arg("Delta"), py::arg("pi"), py::arg("m"), py::arg("d"),
        py::arg("tail"), py::arg("nu"), py::arg("seed"));
}
