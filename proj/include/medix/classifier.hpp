#pragma once
// Desk-scale InD classifier (multinomial logistic regression trained by
// mini-batch GD), per-sample gradient extraction against the final-layer
// weights, reference gradient, pseudo-labeling, and the sub-Gaussianity
// diagnostics (histogram + normal Q-Q).

#include <cstdint>
#include <string>
#include <vector>

#include "medix/dataset.hpp"
#include "medix/matrix.hpp"

namespace medix {

struct TrainConfig {
  double lr = 0.1;
  std::size_t epochs = 200;
  std::size_t batch = 64;
  std::uint64_t seed = 0;
};

struct IndModel {
  Matrix weights;  // K x p
  Vec biases;      // K
  // training metadata
  double lr = 0.0;
  std::size_t epochs = 0;
  std::size_t batch = 0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;

  int num_classes() const { return static_cast<int>(weights.rows); }
  int dim() const { return static_cast<int>(weights.cols); }
};

IndModel train_ind_classifier(const LabeledDataset& data, const TrainConfig& hyper);

// Mean cross-entropy of the model on a dataset.
double cross_entropy(const IndModel& model, const LabeledDataset& data);

// Softmax class probabilities for one sample.
Vec softmax_probs(const IndModel& model, std::span<const double> x);

// Gradient of the cross-entropy at (x, y) w.r.t. the final-layer weights,
// flattened row-major class-major: d = K*p, plus K bias slots when
// include_bias is set (default off).
Vec per_sample_gradient(const IndModel& model, std::span<const double> x, int y,
                        bool include_bias = false);

// Mean per-sample gradient over the dataset (the reference gradient).
Vec reference_gradient(const IndModel& model, const LabeledDataset& data,
                       bool include_bias = false);

struct PseudoLabel {
  int label = 0;
  double confidence = 0.0;  // max softmax, in [1/K, 1]
};

// Argmax prediction; ties break to the lowest class id.
PseudoLabel pseudo_label(const IndModel& model, std::span<const double> x);

// Assigns pseudo labels to every wild sample in place.
void assign_pseudo_labels(const IndModel& model, WildSet& wild);

// Per-sample gradients at the wild samples' pseudo labels, row per sample.
GradientMatrix wild_gradients(const IndModel& model, const WildSet& wild,
                              bool include_bias = false);

struct PrefilterResult {
  WildSet kept;
  double removed_fraction = 0.0;
};

// Keeps samples whose max-softmax confidence is >= threshold.
PrefilterResult confidence_prefilter(const IndModel& model, const WildSet& wild,
                                     double threshold);

struct Histogram {
  double lo = 0.0, hi = 0.0;  // bin edges span [lo, hi], equal widths
  std::vector<std::size_t> counts;
};

struct QQPoint {
  double theoretical = 0.0;  // standard-normal quantile at the rank
  double empirical = 0.0;    // standardized order statistic
};

struct DiagnosticsResult {
  Histogram histogram;
  std::vector<QQPoint> qq;
  bool qq_valid = false;
  std::string qq_error;  // "degenerate column" when the column has zero variance
};

// Histogram + normal Q-Q of one gradient coordinate. Q-Q standardizes by the
// column's sample mean/std and uses quantile ranks (k+0.5)/m.
DiagnosticsResult subgaussian_diagnostics(const GradientMatrix& g, std::size_t coord,
                                          std::size_t bins);

// Checkpoint: one metadata header line, then one parameter per line
// (weights row-major class-major, then biases).
void save_model_csv(const IndModel& model, const std::string& path);
IndModel load_model_csv(const std::string& path);

}  // namespace medix
