// Python module: thin pybind11 layer over the medix core, split per area to
// keep the translation units small.
#include <pybind11/pybind11.h>

namespace py = pybind11;

void bind_core(py::module_&);
void bind_models(py::module_&);
void bind_filter(py::module_&);
void bind_bounds(py::module_&);
void bind_synth(py::module_&);

PYBIND11_MODULE(medix, m) {
  m.doc() = "median-filtered out-of-distribution detection toolkit";
  bind_core(m);
  bind_models(m);
  bind_filter(m);
  bind_bounds(m);
  bind_synth(m);
}
