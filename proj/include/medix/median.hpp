#pragma once
// Element-wise median, the sorted-column index behind the O(d) leave-one-out
// median, and the Weiszfeld geometric-median baseline.

#include <cstdint>
#include <span>
#include <vector>

#include "medix/matrix.hpp"

namespace medix {

// Coordinate j is the median of column j; even counts use the arithmetic mean
// of the two middle order statistics.
Vec element_wise_median(const GradientMatrix& g);

// Per-column sorted snapshot of a gradient matrix plus live-row bookkeeping.
// Built once in O(d m log m); after that, live medians and every leave-one-out
// median cost O(d), with no re-sorting anywhere.
//
// The trick: for the live sorted column v[0..s-1], dropping the element of
// live rank r leaves t = s-1 values w[q] = v[q < r ? q : q+1]. The median of w
// only ever touches v at the handful of positions around (s-1)/2, so caching
// those order statistics per column (refreshed on row removal) makes the
// per-row query a pair of comparisons.
//
// Reads are safe concurrently; remove_rows/restore_all must be externally
// serialized against readers.
class ColumnOrderIndex {
 public:
  static ColumnOrderIndex build(const GradientMatrix& g);

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return d_; }
  std::size_t live_rows() const { return live_count_; }
  bool is_live(std::size_t i) const { return live_[i] != 0; }

  // Full-set ascending permutation of column j (ties stable by row id) and its
  // inverse.
  std::span<const std::uint32_t> column_order(std::size_t j) const {
    return {order_.data() + j * m_, m_};
  }
  std::uint32_t column_rank(std::size_t j, std::size_t i) const {
    return rank_[j * m_ + i];
  }

  void remove_rows(std::span<const std::uint32_t> ids);
  void restore_all();

  // Median over the live rows, O(d).
  Vec live_median() const;

  // Median over the live rows minus row i, O(d). Requires >= 2 live rows.
  void loo_median_into(std::size_t i, std::span<double> out) const;

 private:
  std::size_t m_ = 0, d_ = 0;
  std::vector<double> sorted_vals_;      // d*m, column blocks, ascending
  std::vector<std::uint32_t> order_;     // d*m, row id at sorted position
  std::vector<std::uint32_t> rank_;      // d*m, inverse of order_
  std::vector<char> live_;               // m
  std::size_t live_count_ = 0;
  std::vector<std::uint32_t> live_rank_; // d*m, rank among live rows (live rows only)
  // Live order statistics at positions (s-3)/2 .. (s+1)/2, refreshed on
  // removal; everything the live median and any loo median can touch.
  std::vector<double> central_;          // d*5
  void refresh();
};

// Median of G without row i, taken over the index's current live set.
// The index must have been built from this G (dimensions are checked; values
// are read from the index's snapshot).
Vec loo_median(const ColumnOrderIndex& index, const GradientMatrix& g, std::size_t i);

struct GeometricMedianResult {
  Vec point;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> objective_trace;  // sum of distances, one entry per iterate
};

// Weiszfeld iteration from the centroid; stops when the step norm drops below
// tol. Iterates landing on a data point (within 1e-12) are nudged by
// 1e-9 x column range before the update.
GeometricMedianResult geometric_median(const GradientMatrix& g, double tol = 1e-10,
                                       std::size_t max_iter = 200);

}  // namespace medix
