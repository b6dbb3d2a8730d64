#pragma once
// Small statistics helpers shared by the sweep commands and the test suite.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace medix {

// 1-based ranks with ties averaged.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && xs[idx[j]] == xs[idx[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2;
    for (std::size_t q = i; q < j; ++q) ranks[idx[q]] = avg;
    i = j;
  }
  return ranks;
}

// Spearman rank correlation (Pearson on average-tie ranks).
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
  if (x.size() < 2) throw std::invalid_argument("need at least two points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("constant input");
  return sxy / std::sqrt(sxx * syy);
}

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("empty sample set");
  double s = 0.0;
  for (double v : xs) s += v;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("need at least two points");
  const double mu = mean_of(xs);
  double ss = 0.0;
  for (double v : xs) ss += (v - mu) * (v - mu);
  return ss / static_cast<double>(xs.size() - 1);
}

// Plain moment-ratio kurtosis m4/m2^2 (Gaussian -> 3).
inline double kurtosis(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("need at least two points");
  const double mu = mean_of(xs);
  double m2 = 0.0, m4 = 0.0;
  for (double v : xs) {
    const double dev = v - mu;
    m2 += dev * dev;
    m4 += dev * dev * dev * dev;
  }
  const double n = static_cast<double>(xs.size());
  m2 /= n;
  m4 /= n;
  if (m2 == 0.0) throw std::invalid_argument("constant input");
  return m4 / (m2 * m2);
}

}  // namespace medix
