#include "medix/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "medix/io.hpp"
#include "medix/rng.hpp"

namespace medix {

namespace {

void logits_of(const IndModel& model, std::span<const double> x, Vec& out) {
  const int K = model.num_classes(), p = model.dim();
  if (x.size() != static_cast<std::size_t>(p))
    throw std::invalid_argument("feature length mismatch");
  for (int c = 0; c < K; ++c) {
    double z = model.biases[c];
    const double* w = model.weights.values.data() + c * p;
    for (int f = 0; f < p; ++f) z += w[f] * x[f];
    out[c] = z;
  }
}

void softmax_inplace(Vec& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

void check_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature");
}

}  // namespace

Vec softmax_probs(const IndModel& model, std::span<const double> x) {
  check_finite(x);
  Vec z(model.num_classes());
  logits_of(model, x, z);
  softmax_inplace(z);
  return z;
}

double cross_entropy(const IndModel& model, const LabeledDataset& data) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vec p = softmax_probs(model, data.features.row(i));
    loss -= std::log(std::max(p[data.labels[i]], 1e-300));
  }
  return loss / static_cast<double>(data.size());
}

IndModel train_ind_classifier(const LabeledDataset& data, const TrainConfig& hyper) {
  validate_dataset(data);
  if (hyper.lr <= 0.0) throw std::invalid_argument("lr must be positive");
  if (hyper.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (hyper.batch < 1) throw std::invalid_argument("batch must be >= 1");
  bool single_class = true;
  for (int y : data.labels)
    if (y != data.labels[0]) {
      single_class = false;
      break;
    }
  if (single_class) throw std::invalid_argument("degenerate dataset: single class");

  const std::size_t n = data.size();
  const int K = data.num_classes;
  const int p = static_cast<int>(data.features.cols);

  IndModel model;
  model.weights = Matrix(K, p, 0.0);
  model.biases.assign(K, 0.0);
  model.lr = hyper.lr;
  model.epochs = hyper.epochs;
  model.batch = hyper.batch;
  model.seed = hyper.seed;

  rng::Philox shuffle_rng(hyper.seed, /*stream=*/0x747261696eULL);  // "train"
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  Vec probs(K);
  Matrix gw(K, p);
  Vec gb(K);

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i)  // Fisher-Yates, seeded
      std::swap(idx[i - 1], idx[shuffle_rng.below(i)]);
    for (std::size_t start = 0; start < n; start += hyper.batch) {
      const std::size_t stop = std::min(n, start + hyper.batch);
      std::fill(gw.values.begin(), gw.values.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const std::uint32_t i = idx[b];
        const auto x = data.features.row(i);
        logits_of(model, x, probs);
        softmax_inplace(probs);
        probs[data.labels[i]] -= 1.0;  // softmax - onehot
        for (int c = 0; c < K; ++c) {
          double* gwc = gw.values.data() + c * p;
          for (int f = 0; f < p; ++f) gwc[f] += probs[c] * x[f];
          gb[c] += probs[c];
        }
      }
      const double scale = hyper.lr / static_cast<double>(stop - start);
      for (std::size_t t = 0; t < model.weights.values.size(); ++t)
        model.weights.values[t] -= scale * gw.values[t];
      for (int c = 0; c < K; ++c) model.biases[c] -= scale * gb[c];
    }
  }
  model.final_loss = cross_entropy(model, data);
  return model;
}

Vec per_sample_gradient(const IndModel& model, std::span<const double> x, int y,
                        bool include_bias) {
  if (y < 0 || y >= model.num_classes()) throw std::invalid_argument("label out of range");
  const int K = model.num_classes(), p = model.dim();
  Vec probs = softmax_probs(model, x);
  probs[y] -= 1.0;
  Vec g(include_bias ? K * p + K : K * p);
  for (int c = 0; c < K; ++c)
    for (int f = 0; f < p; ++f) g[c * p + f] = probs[c] * x[f];
  if (include_bias)
    for (int c = 0; c < K; ++c) g[K * p + c] = probs[c];
  return g;
}

Vec reference_gradient(const IndModel& model, const LabeledDataset& data,
                       bool include_bias) {
  if (data.size() == 0) throw std::invalid_argument("empty dataset");
  const int K = model.num_classes(), p = model.dim();
  Vec sum(include_bias ? K * p + K : K * p, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vec g = per_sample_gradient(model, data.features.row(i), data.labels[i],
                                      include_bias);
    for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += g[t];
  }
  for (double& v : sum) v /= static_cast<double>(data.size());
  return sum;
}

PseudoLabel pseudo_label(const IndModel& model, std::span<const double> x) {
  const Vec p = softmax_probs(model, x);
  PseudoLabel out;
  out.label = 0;
  out.confidence = p[0];
  for (int c = 1; c < model.num_classes(); ++c)
    if (p[c] > out.confidence) {  // strict: ties keep the lowest class id
      out.confidence = p[c];
      out.label = c;
    }
  return out;
}

void assign_pseudo_labels(const IndModel& model, WildSet& wild) {
  wild.pseudo_labels.resize(wild.size());
  for (std::size_t i = 0; i < wild.size(); ++i)
    wild.pseudo_labels[i] = pseudo_label(model, wild.features.row(i)).label;
}

GradientMatrix wild_gradients(const IndModel& model, const WildSet& wild,
                              bool include_bias) {
  if (wild.pseudo_labels.size() != wild.size())
    throw std::invalid_argument("pseudo labels missing; assign them first");
  const int K = model.num_classes(), p = model.dim();
  const std::size_t d = include_bias ? K * p + K : K * p;
  GradientMatrix g(wild.size(), d);
  for (std::size_t i = 0; i < wild.size(); ++i) {
    const Vec gi = per_sample_gradient(model, wild.features.row(i),
                                       wild.pseudo_labels[i], include_bias);
    std::copy(gi.begin(), gi.end(), g.row(i).begin());
  }
  return g;
}

PrefilterResult confidence_prefilter(const IndModel& model, const WildSet& wild,
                                     double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw std::invalid_argument("threshold outside [0,1]");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < wild.size(); ++i)
    if (pseudo_label(model, wild.features.row(i)).confidence >= threshold)
      keep.push_back(i);

  PrefilterResult res;
  res.removed_fraction =
      wild.size() == 0
          ? 0.0
          : 1.0 - static_cast<double>(keep.size()) / static_cast<double>(wild.size());
  res.kept.features = Matrix(keep.size(), wild.features.cols);
  res.kept.origin.resize(keep.size());
  if (!wild.pseudo_labels.empty()) res.kept.pseudo_labels.resize(keep.size());
  if (!wild.gradients.empty()) res.kept.gradients = Matrix(keep.size(), wild.gradients.cols);
  for (std::size_t t = 0; t < keep.size(); ++t) {
    const std::size_t i = keep[t];
    std::copy(wild.features.row(i).begin(), wild.features.row(i).end(),
              res.kept.features.row(t).begin());
    res.kept.origin[t] = wild.origin[i];
    if (!wild.pseudo_labels.empty()) res.kept.pseudo_labels[t] = wild.pseudo_labels[i];
    if (!wild.gradients.empty())
      std::copy(wild.gradients.row(i).begin(), wild.gradients.row(i).end(),
                res.kept.gradients.row(t).begin());
  }
  return res;
}

DiagnosticsResult subgaussian_diagnostics(const GradientMatrix& g, std::size_t coord,
                                          std::size_t bins) {
  validate_gradients(g);
  if (coord >= g.cols) throw std::out_of_range("coordinate out of range");
  if (bins < 2) throw std::invalid_argument("bins must be >= 2");
  const std::size_t m = g.rows;

  Vec col(m);
  for (std::size_t i = 0; i < m; ++i) col[i] = g(i, coord);
  const auto [lo_it, hi_it] = std::minmax_element(col.begin(), col.end());
  double lo = *lo_it, hi = *hi_it;

  DiagnosticsResult res;
  if (lo == hi) {  // widen so a degenerate column still gets sane edges
    lo -= 0.5;
    hi += 0.5;
  }
  res.histogram.lo = lo;
  res.histogram.hi = hi;
  res.histogram.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : col) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    if (b >= bins) b = bins - 1;  // right edge closes the last bin
    ++res.histogram.counts[b];
  }

  double mean = 0.0;
  for (double v : col) mean += v;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : col) ss += (v - mean) * (v - mean);
  const double sd = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
  if (sd == 0.0) {
    res.qq_valid = false;
    res.qq_error = "degenerate column";
    return res;
  }

  std::sort(col.begin(), col.end());
  res.qq.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double rank = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
    res.qq[k] = {rng::normal_quantile(rank), (col[k] - mean) / sd};
  }
  res.qq_valid = true;
  return res;
}

void save_model_csv(const IndModel& model, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "# IndModel K=" << model.num_classes() << " p=" << model.dim()
    << " lr=" << format_double(model.lr) << " epochs=" << model.epochs
    << " batch=" << model.batch << " seed=" << model.seed
    << " final_loss=" << format_double(model.final_loss) << '\n';
  for (double v : model.weights.values) f << format_double(v) << '\n';
  for (double v : model.biases) f << format_double(v) << '\n';
}

IndModel load_model_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string header;
  std::getline(f, header);
  IndModel model;
  int K = 0, p = 0;
  std::istringstream hs(header);
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "K") K = std::stoi(val);
    else if (key == "p") p = std::stoi(val);
    else if (key == "lr") model.lr = std::stod(val);
    else if (key == "epochs") model.epochs = std::stoul(val);
    else if (key == "batch") model.batch = std::stoul(val);
    else if (key == "seed") model.seed = std::stoull(val);
    else if (key == "final_loss") model.final_loss = std::stod(val);
  }
  if (K < 2 || p < 1) throw std::runtime_error("malformed model header in " + path);
  model.weights = Matrix(K, p);
  model.biases.assign(K, 0.0);
  std::string line;
  for (double& v : model.weights.values) {
    if (!std::getline(f, line)) throw std::runtime_error("truncated model file: " + path);
    v = std::stod(line);
  }
  for (double& v : model.biases) {
    if (!std::getline(f, line)) throw std::runtime_error("truncated model file: " + path);
    v = std::stod(line);
  }
  return model;
}

}  // namespace medix
