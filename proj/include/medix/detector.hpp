#pragma once
// Binary OOD detector (linear score, softplus surrogate) and the evaluation
// metric suite: FPR at fixed TPR, AUROC, InD accuracy.

#include <cstdint>
#include <span>
#include <vector>

#include "medix/classifier.hpp"
#include "medix/dataset.hpp"
#include "medix/matrix.hpp"

namespace medix {

struct OodDetector {
  Vec weights;             // p
  double bias = 0.0;
  double threshold = 0.0;  // classify InD iff score > threshold
};

struct DetectorConfig {
  double lr = 0.1;
  std::size_t epochs = 200;
  double ind_loss_weight = 10.0;  // weight on the binary term of the combined objective
  std::uint64_t seed = 0;
};

// Full-batch gradient descent on
//   ind_loss_weight * mean softplus(-y_b * (w.x + b)),  y_b = +1 InD, -1 outlier.
// This is the combined objective with the multiclass InD term dropped: the
// desk-scale detector is linear on raw features and shares no parameters with
// the classifier, so that term has zero gradient here and the weight's only
// observable effect is scaling the binary term.
OodDetector train_ood_detector(const Matrix& ind_feats, const Matrix& outlier_feats,
                               const DetectorConfig& hyper);

double score(const OodDetector& det, std::span<const double> x);
Vec score_all(const OodDetector& det, const Matrix& feats);

// 0/1 training loss: mean[score_in <= 0] + mean[score_out >= 0].
double zero_one_loss(const OodDetector& det, const Matrix& ind_feats,
                     const Matrix& outlier_feats);

// The training objective: ind_loss_weight * mean softplus(-y_b * score).
double detector_loss(const OodDetector& det, const Matrix& ind_feats,
                     const Matrix& outlier_feats, double ind_loss_weight = 10.0);

// Largest threshold with mean[scores_in >= threshold] >= tpr_target
// (conservative quantile; ties side with InD).
double threshold_at_tpr(std::span<const double> scores_in, double tpr_target = 0.95);

// FPR at threshold_at_tpr: fraction of scores_out >= that threshold.
double fpr_at_tpr(std::span<const double> scores_in, std::span<const double> scores_out,
                  double tpr_target = 0.95);

// Mann-Whitney form: P(score_in > score_out) + 0.5 P(tie), via average ranks.
double auroc(std::span<const double> scores_in, std::span<const double> scores_out);

double ind_accuracy(const IndModel& model, const LabeledDataset& test);

struct DetectionMetrics {
  double fpr95 = 0.0;
  double auroc = 0.0;
  double tpr = 0.0;  // realized TPR at the FPR95 threshold; >= the target
  double ind_acc = 0.0;
  double err_in = 0.0;
  double err_out = 0.0;
};

// CSV row `fpr95,auroc,ind_acc,err_in,err_out`.
void write_metrics_csv(const DetectionMetrics& m, const std::string& path);

}  // namespace medix
