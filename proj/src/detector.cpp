#include "medix/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "medix/io.hpp"
#include "medix/rng.hpp"

namespace medix {

namespace {

double softplus(double u) {  // ln(1 + e^u), saturation-safe
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace

OodDetector train_ood_detector(const Matrix& ind_feats, const Matrix& outlier_feats,
                               const DetectorConfig& hyper) {
  if (ind_feats.rows == 0) throw std::invalid_argument("empty InD feature set");
  if (outlier_feats.rows == 0)
    throw std::invalid_argument("no candidate outliers; run filter first");
  if (ind_feats.cols != outlier_feats.cols)
    throw std::invalid_argument("feature dimension mismatch");
  if (hyper.lr <= 0.0) throw std::invalid_argument("lr must be positive");

  const std::size_t p = ind_feats.cols;
  const std::size_t n = ind_feats.rows + outlier_feats.rows;
  OodDetector det;
  det.weights.assign(p, 0.0);
  rng::Philox rng(hyper.seed, /*stream=*/0x646574ULL);  // "det"
  for (double& w : det.weights) w = 0.01 * rng.normal();
  det.bias = 0.01 * rng.normal();

  Vec gw(p);
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    const auto add = [&](const Matrix& feats, double y) {
      for (std::size_t i = 0; i < feats.rows; ++i) {
        const auto x = feats.row(i);
        double s = det.bias;
        for (std::size_t j = 0; j < p; ++j) s += det.weights[j] * x[j];
        const double coef = -y * logistic(-y * s);
        for (std::size_t j = 0; j < p; ++j) gw[j] += coef * x[j];
        gb += coef;
      }
    };
    add(ind_feats, 1.0);
    add(outlier_feats, -1.0);
    const double scale =
        hyper.lr * hyper.ind_loss_weight / static_cast<double>(n);
    for (std::size_t j = 0; j < p; ++j) det.weights[j] -= scale * gw[j];
    det.bias -= scale * gb;
  }
  return det;
}

double score(const OodDetector& det, std::span<const double> x) {
  if (x.size() != det.weights.size())
    throw std::invalid_argument("feature length mismatch");
  double s = det.bias;
  for (std::size_t j = 0; j < x.size(); ++j) s += det.weights[j] * x[j];
  return s;
}

Vec score_all(const OodDetector& det, const Matrix& feats) {
  Vec out(feats.rows);
  for (std::size_t i = 0; i < feats.rows; ++i) out[i] = score(det, feats.row(i));
  return out;
}

double detector_loss(const OodDetector& det, const Matrix& ind_feats,
                     const Matrix& outlier_feats, double ind_loss_weight) {
  double total = 0.0;
  for (std::size_t i = 0; i < ind_feats.rows; ++i)
    total += softplus(-score(det, ind_feats.row(i)));
  for (std::size_t i = 0; i < outlier_feats.rows; ++i)
    total += softplus(score(det, outlier_feats.row(i)));
  const double n = static_cast<double>(ind_feats.rows + outlier_feats.rows);
  return ind_loss_weight * total / n;
}

double zero_one_loss(const OodDetector& det, const Matrix& ind_feats,
                     const Matrix& outlier_feats) {
  std::size_t miss_in = 0, miss_out = 0;
  for (std::size_t i = 0; i < ind_feats.rows; ++i)
    miss_in += (score(det, ind_feats.row(i)) <= det.threshold);
  for (std::size_t i = 0; i < outlier_feats.rows; ++i)
    miss_out += (score(det, outlier_feats.row(i)) >= det.threshold);
  return static_cast<double>(miss_in) / static_cast<double>(ind_feats.rows) +
         static_cast<double>(miss_out) / static_cast<double>(outlier_feats.rows);
}

double threshold_at_tpr(std::span<const double> scores_in, double tpr_target) {
  if (scores_in.empty()) throw std::invalid_argument("empty score list");
  if (!(tpr_target > 0.0 && tpr_target <= 1.0))
    throw std::invalid_argument("tpr_target outside (0,1]");
  const std::size_t n = scores_in.size();
  // Smallest count c with c/n >= target; threshold = c-th largest InD score is
  // the largest cutoff keeping TPR >= target under inclusive >= counting.
  const auto c = static_cast<std::size_t>(
      std::ceil(tpr_target * static_cast<double>(n) - 1e-12));
  Vec sorted(scores_in.begin(), scores_in.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return sorted[c - 1];
}

double fpr_at_tpr(std::span<const double> scores_in, std::span<const double> scores_out,
                  double tpr_target) {
  if (scores_out.empty()) throw std::invalid_argument("empty score list");
  const double threshold = threshold_at_tpr(scores_in, tpr_target);
  std::size_t fp = 0;
  for (double s : scores_out) fp += (s >= threshold);
  return static_cast<double>(fp) / static_cast<double>(scores_out.size());
}

double auroc(std::span<const double> scores_in, std::span<const double> scores_out) {
  if (scores_in.empty() || scores_out.empty())
    throw std::invalid_argument("empty score list");
  const std::size_t n_in = scores_in.size(), n_out = scores_out.size();
  std::vector<std::pair<double, int>> all;  // (score, is_in)
  all.reserve(n_in + n_out);
  for (double s : scores_in) all.emplace_back(s, 1);
  for (double s : scores_out) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Average ranks over tie groups; rank sums of half-integers stay exact.
  double rank_sum_in = 0.0;
  std::size_t t = 0;
  while (t < all.size()) {
    std::size_t u = t;
    while (u < all.size() && all[u].first == all[t].first) ++u;
    const double avg_rank = (static_cast<double>(t + 1) + static_cast<double>(u)) / 2;
    for (std::size_t q = t; q < u; ++q)
      if (all[q].second) rank_sum_in += avg_rank;
    t = u;
  }
  const double u_stat =
      rank_sum_in - static_cast<double>(n_in) * (static_cast<double>(n_in) + 1.0) / 2;
  return u_stat / (static_cast<double>(n_in) * static_cast<double>(n_out));
}

double ind_accuracy(const IndModel& model, const LabeledDataset& test) {
  if (test.size() == 0) throw std::invalid_argument("empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i)
    hits += (pseudo_label(model, test.features.row(i)).label == test.labels[i]);
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

void write_metrics_csv(const DetectionMetrics& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "fpr95,auroc,ind_acc,err_in,err_out\n"
    << format_double(m.fpr95) << ',' << format_double(m.auroc) << ','
    << format_double(m.ind_acc) << ',' << format_double(m.err_in) << ','
    << format_double(m.err_out) << '\n';
}

}  // namespace medix
