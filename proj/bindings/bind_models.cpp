// InD classifier, gradient extraction, and the binary OOD detector with its
// metric suite.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "medix/classifier.hpp"
#include "medix/detector.hpp"

namespace py = pybind11;
using namespace medix;

void bind_models(py::module_& m) {
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def(py::init([](double lr, std::size_t epochs, std::size_t batch, std::uint64_t seed) {
             return TrainConfig{lr, epochs, batch, seed};
           }),
           py::arg("lr") = 0.1, py::arg("epochs") = 200, py::arg("batch") = 64,
           py::arg("seed") = 0)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch", &TrainConfig::batch)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<IndModel>(m, "IndModel")
      .def(py::init<>())
      .def_readwrite("weights", &IndModel::weights)
      .def_readwrite("biases", &IndModel::biases)
      .def_readonly("final_loss", &IndModel::final_loss)
      .def("num_classes", &IndModel::num_classes)
      .def("dim", &IndModel::dim)
      .def("save", [](const IndModel& model, const std::string& path) {
        save_model_csv(model, path);
      })
      .def_static("load", &load_model_csv, py::arg("path"));

  m.def("train_ind_classifier", &train_ind_classifier, py::arg("data"), py::arg("hyper"));
  m.def("cross_entropy", &cross_entropy, py::arg("model"), py::arg("data"));
  m.def("softmax_probs",
        [](const IndModel& model, const Vec& x) { return softmax_probs(model, x); },
        py::arg("model"), py::arg("x"));
  m.def("per_sample_gradient",
        [](const IndModel& model, const Vec& x, int y, bool include_bias) {
          return per_sample_gradient(model, x, y, include_bias);
        },
        py::arg("model"), py::arg("x"), py::arg("y"), py::arg("include_bias") = false);
  m.def("reference_gradient", &reference_gradient, py::arg("model"), py::arg("data"),
        py::arg("include_bias") = false);

  py::class_<PseudoLabel>(m, "PseudoLabel")
      .def_readonly("label", &PseudoLabel::label)
      .def_readonly("confidence", &PseudoLabel::confidence);
  m.def("pseudo_label",
        [](const IndModel& model, const Vec& x) { return pseudo_label(model, x); },
        py::arg("model"), py::arg("x"));
  m.def("assign_pseudo_labels", &assign_pseudo_labels, py::arg("model"), py::arg("wild"));
  m.def("wild_gradients", &wild_gradients, py::arg("model"), py::arg("wild"),
        py::arg("include_bias") = false);

  py::class_<PrefilterResult>(m, "PrefilterResult")
      .def_readonly("kept", &PrefilterResult::kept)
      .def_readonly("removed_fraction", &PrefilterResult::removed_fraction);
  m.def("confidence_prefilter", &confidence_prefilter, py::arg("model"), py::arg("wild"),
        py::arg("threshold"));

  py::class_<Histogram>(m, "Histogram")
      .def_readonly("lo", &Histogram::lo)
      .def_readonly("hi", &Histogram::hi)
      .def_readonly("counts", &Histogram::counts);
  py::class_<QQPoint>(m, "QQPoint")
      .def_readonly("theoretical", &QQPoint::theoretical)
      .def_readonly("empirical", &QQPoint::empirical);
  py::class_<DiagnosticsResult>(m, "DiagnosticsResult")
      .def_readonly("histogram", &DiagnosticsResult::histogram)
      .def_readonly("qq", &DiagnosticsResult::qq)
      .def_readonly("qq_valid", &DiagnosticsResult::qq_valid)
      .def_readonly("qq_error", &DiagnosticsResult::qq_error);
  m.def("subgaussian_diagnostics", &subgaussian_diagnostics, py::arg("gradients"),
        py::arg("coord"), py::arg("bins"));

  py::class_<DetectorConfig>(m, "DetectorConfig")
      .def(py::init<>())
      .def(py::init([](double lr, std::size_t epochs, double ind_loss_weight,
                       std::uint64_t seed) {
             return DetectorConfig{lr, epochs, ind_loss_weight, seed};
           }),
           py::arg("lr") = 0.1, py::arg("epochs") = 200, py::arg("ind_loss_weight") = 10.0,
           py::arg("seed") = 0)
      .def_readwrite("lr", &DetectorConfig::lr)
      .def_readwrite("epochs", &DetectorConfig::epochs)
      .def_readwrite("ind_loss_weight", &DetectorConfig::ind_loss_weight)
      .def_readwrite("seed", &DetectorConfig::seed);

  py::class_<OodDetector>(m, "OodDetector")
      .def(py::init<>())
      .def_readwrite("weights", &OodDetector::weights)
      .def_readwrite("bias", &OodDetector::bias)
      .def_readwrite("threshold", &OodDetector::threshold);

  m.def("train_ood_detector", &train_ood_detector, py::arg("ind_feats"),
        py::arg("outlier_feats"), py::arg("hyper"));
  m.def("score", [](const OodDetector& det, const Vec& x) { return score(det, x); },
        py::arg("det"), py::arg("x"));
  m.def("score_all", &score_all, py::arg("det"), py::arg("feats"));
  m.def("zero_one_loss", &zero_one_loss, py::arg("det"), py::arg("ind_feats"),
        py::arg("outlier_feats"));
  m.def("detector_loss", &detector_loss, py::arg("det"), py::arg("ind_feats"),
        py::arg("outlier_feats"), py::arg("ind_loss_weight") = 10.0);
  m.def("threshold_at_tpr",
        [](const Vec& scores_in, double tpr_target) {
          return threshold_at_tpr(scores_in, tpr_target);
        },
        py::arg("scores_in"), py::arg("tpr_target") = 0.95);
  m.def("fpr_at_tpr",
        [](const Vec& scores_in, const Vec& scores_out, double tpr_target) {
          return fpr_at_tpr(scores_in, scores_out, tpr_target);
        },
        py::arg("scores_in"), py::arg("scores_out"), py::arg("tpr_target") = 0.95);
  m.def("auroc",
        [](const Vec& scores_in, const Vec& scores_out) {
          return auroc(scores_in, scores_out);
        },
        py::arg("scores_in"), py::arg("scores_out"));
  m.def("ind_accuracy", &ind_accuracy, py::arg("model"), py::arg("test"));

  py::class_<DetectionMetrics>(m, "DetectionMetrics")
      .def(py::init<>())
      .def_readwrite("fpr95", &DetectionMetrics::fpr95)
      .def_readwrite("auroc", &DetectionMetrics::auroc)
      .def_readwrite("tpr", &DetectionMetrics::tpr)
      .def_readwrite("ind_acc", &DetectionMetrics::ind_acc)
      .def_readwrite("err_in", &DetectionMetrics::err_in)
      .def_readwrite("err_out", &DetectionMetrics::err_out);
  m.def("write_metrics_csv", &write_metrics_csv, py::arg("m"), py::arg("path"));
}
