#pragma once
// Dense row-major double matrix used for gradient sets and feature tables.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace medix {

using Vec = std::vector<double>;

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // rows*cols, row-major

  Matrix() = default;
  Matrix(std::size_t m, std::size_t d, double fill = 0.0)
      : rows(m), cols(d), values(m * d, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
  std::span<double> row(std::size_t i) {
    return {values.data() + i * cols, cols};
  }

  bool empty() const { return rows == 0 || cols == 0; }
};

// m per-sample loss-gradient row vectors of dimension d.
using GradientMatrix = Matrix;

// Throws if the matrix is empty or holds a NaN/Inf entry.
inline void validate_gradients(const GradientMatrix& g) {
  if (g.empty()) throw std::invalid_argument("empty sample set");
  for (double v : g.values)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite gradient");
}

inline double l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("l2_distance: length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return std::sqrt(s);
}

inline double l2_norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

}  // namespace medix
