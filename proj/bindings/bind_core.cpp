// Core carriers and primitives: Matrix, datasets, medians, small statistics,
// the Philox generator, and file formats.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

#include "medix/dataset.hpp"
#include "medix/io.hpp"
#include "medix/matrix.hpp"
#include "medix/median.hpp"
#include "medix/rng.hpp"
#include "medix/stats.hpp"

namespace py = pybind11;
using namespace medix;

namespace {

void check_index(const Matrix& g, std::size_t i, std::size_t j) {
  if (i >= g.rows || j >= g.cols) throw std::out_of_range("matrix index out of range");
}

Matrix matrix_from_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) return Matrix();
  Matrix g(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != g.cols) throw std::invalid_argument("ragged row list");
    std::copy(rows[i].begin(), rows[i].end(), g.row(i).begin());
  }
  return g;
}

}  // namespace

void bind_core(py::module_& m) {
  py::class_<Matrix>(m, "Matrix")
      .def(py::init<>())
      .def(py::init<std::size_t, std::size_t, double>(), py::arg("rows"), py::arg("cols"),
           py::arg("fill") = 0.0)
      .def_static("from_rows", &matrix_from_rows, py::arg("rows"))
      .def_readonly("rows", &Matrix::rows)
      .def_readonly("cols", &Matrix::cols)
      .def_readwrite("values", &Matrix::values)
      .def("get",
           [](const Matrix& g, std::size_t i, std::size_t j) {
             check_index(g, i, j);
             return g(i, j);
           })
      .def("set",
           [](Matrix& g, std::size_t i, std::size_t j, double v) {
             check_index(g, i, j);
             g(i, j) = v;
           })
      .def("row",
           [](const Matrix& g, std::size_t i) {
             if (i >= g.rows) throw std::out_of_range("row index out of range");
             const auto r = g.row(i);
             return Vec(r.begin(), r.end());
           })
      .def("tolist",
           [](const Matrix& g) {
             std::vector<Vec> out(g.rows);
             for (std::size_t i = 0; i < g.rows; ++i) {
               const auto r = g.row(i);
               out[i].assign(r.begin(), r.end());
             }
             return out;
           })
      .def("empty", &Matrix::empty)
      .def("__repr__", [](const Matrix& g) {
        return "Matrix(" + std::to_string(g.rows) + "x" + std::to_string(g.cols) + ")";
      });

  py::enum_<Origin>(m, "Origin").value("ind", Origin::ind).value("ood", Origin::ood);

  py::class_<LabeledDataset>(m, "LabeledDataset")
      .def(py::init<>())
      .def_readwrite("features", &LabeledDataset::features)
      .def_readwrite("labels", &LabeledDataset::labels)
      .def_readwrite("num_classes", &LabeledDataset::num_classes)
      .def("__len__", &LabeledDataset::size)
      .def("validate", [](const LabeledDataset& d) { validate_dataset(d); });

  py::class_<WildSet>(m, "WildSet")
      .def(py::init<>())
      .def_readwrite("features", &WildSet::features)
      .def_readwrite("origin", &WildSet::origin)
      .def_readwrite("pseudo_labels", &WildSet::pseudo_labels)
      .def_readwrite("gradients", &WildSet::gradients)
      .def("__len__", &WildSet::size)
      .def("realized_pi", &WildSet::realized_pi);

  m.def("element_wise_median", &element_wise_median, py::arg("gradients"));

  py::class_<GeometricMedianResult>(m, "GeometricMedianResult")
      .def_readonly("point", &GeometricMedianResult::point)
      .def_readonly("converged", &GeometricMedianResult::converged)
      .def_readonly("iterations", &GeometricMedianResult::iterations)
      .def_readonly("objective_trace", &GeometricMedianResult::objective_trace);
  m.def("geometric_median", &geometric_median, py::arg("gradients"), py::arg("tol") = 1e-10,
        py::arg("max_iter") = 200);

  m.def("l2_distance", [](const Vec& a, const Vec& b) { return l2_distance(a, b); },
        py::arg("a"), py::arg("b"));
  m.def("l2_norm", [](const Vec& a) { return l2_norm(a); }, py::arg("a"));
  m.def("average_ranks", [](const Vec& xs) { return average_ranks(xs); }, py::arg("xs"));
  m.def("spearman", [](const Vec& x, const Vec& y) { return spearman(x, y); }, py::arg("x"),
        py::arg("y"));
  m.def("mean_of", [](const Vec& xs) { return mean_of(xs); }, py::arg("xs"));
  m.def("sample_variance", [](const Vec& xs) { return sample_variance(xs); }, py::arg("xs"));
  m.def("kurtosis", [](const Vec& xs) { return kurtosis(xs); }, py::arg("xs"));

  py::class_<rng::Philox>(m, "Philox")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream") = 0)
      .def("uniform", &rng::Philox::uniform)
      .def("uniform_pos", &rng::Philox::uniform_pos)
      .def("normal", &rng::Philox::normal)
      .def("chi_square", &rng::Philox::chi_square, py::arg("nu"))
      .def("student_t", &rng::Philox::student_t, py::arg("nu"))
      .def("below", &rng::Philox::below, py::arg("n"));
  m.def("normal_quantile", &rng::normal_quantile, py::arg("p"));

  m.def("format_double", &format_double, py::arg("v"));
  m.def("write_matrix_csv", &write_matrix_csv, py::arg("g"), py::arg("path"));
  m.def("read_matrix_csv", &read_matrix_csv, py::arg("path"));
  m.def("write_matrix_binary", &write_matrix_binary, py::arg("g"), py::arg("path"));
  m.def("read_matrix_binary", &read_matrix_binary, py::arg("path"));
  m.def("write_matrix_any", &write_matrix_any, py::arg("g"), py::arg("path"));
  m.def("read_matrix_any", &read_matrix_any, py::arg("path"));
  m.def("write_dataset_csv", &write_dataset_csv, py::arg("data"), py::arg("path"));
  m.def("read_dataset_csv", &read_dataset_csv, py::arg("path"));
  m.def("write_wild_csv", &write_wild_csv, py::arg("wild"), py::arg("path"));
  m.def("read_wild_csv", &read_wild_csv, py::arg("path"));
  m.def("write_scores", &write_scores, py::arg("scores"), py::arg("path"));
  m.def("read_scores", &read_scores, py::arg("path"));
}
