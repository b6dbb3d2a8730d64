#include "medix/median.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace medix {

Vec element_wise_median(const GradientMatrix& g) {
  validate_gradients(g);
  const std::size_t m = g.rows, d = g.cols;
  Vec out(d);
  Vec scratch(m);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < m; ++i) scratch[i] = g(i, j);
    const std::size_t mid = m / 2;
    std::nth_element(scratch.begin(), scratch.begin() + mid, scratch.end());
    const double hi = scratch[mid];
    if (m % 2 == 1) {
      out[j] = hi;
    } else {
      const double lo = *std::max_element(scratch.begin(), scratch.begin() + mid);
      out[j] = (lo + hi) / 2;
    }
  }
  return out;
}

ColumnOrderIndex ColumnOrderIndex::build(const GradientMatrix& g) {
  validate_gradients(g);
  ColumnOrderIndex idx;
  idx.m_ = g.rows;
  idx.d_ = g.cols;
  idx.sorted_vals_.resize(idx.m_ * idx.d_);
  idx.order_.resize(idx.m_ * idx.d_);
  idx.rank_.resize(idx.m_ * idx.d_);
  idx.live_.assign(idx.m_, 1);
  idx.live_count_ = idx.m_;
  idx.live_rank_.resize(idx.m_ * idx.d_);
  idx.central_.resize(idx.d_ * 3);

  std::vector<std::pair<double, std::uint32_t>> col(idx.m_);
  for (std::size_t j = 0; j < idx.d_; ++j) {
    for (std::size_t i = 0; i < idx.m_; ++i)
      col[i] = {g(i, j), static_cast<std::uint32_t>(i)};
    std::sort(col.begin(), col.end());  // ties resolve by row id: stable order
    for (std::size_t t = 0; t < idx.m_; ++t) {
      idx.sorted_vals_[j * idx.m_ + t] = col[t].first;
      idx.order_[j * idx.m_ + t] = col[t].second;
      idx.rank_[j * idx.m_ + col[t].second] = static_cast<std::uint32_t>(t);
    }
  }
  idx.refresh();
  return idx;
}

void ColumnOrderIndex::refresh() {
  const std::size_t s = live_count_;
  const long base = std::max<long>(0, (static_cast<long>(s) - 3) / 2);
  for (std::size_t j = 0; j < d_; ++j) {
    const std::uint32_t* ord = order_.data() + j * m_;
    const double* vals = sorted_vals_.data() + j * m_;
    std::uint32_t* lr = live_rank_.data() + j * m_;
    double* cen = central_.data() + j * 3;
    std::uint32_t next = 0;
    for (std::size_t t = 0; t < m_; ++t) {
      const std::uint32_t row = ord[t];
      if (!live_[row]) continue;
      lr[row] = next;
      const long off = static_cast<long>(next) - base;
      if (off >= 0 && off < 3) cen[off] = vals[t];
      ++next;
    }
  }
}

void ColumnOrderIndex::remove_rows(std::span<const std::uint32_t> ids) {
  for (std::uint32_t id : ids) {
    if (id >= m_ || !live_[id])
      throw std::invalid_argument("dead or out-of-range row id");
    live_[id] = 0;
    --live_count_;
  }
  refresh();
}

void ColumnOrderIndex::restore_all() {
  live_.assign(m_, 1);
  live_count_ = m_;
  refresh();
}

Vec ColumnOrderIndex::live_median() const {
  const std::size_t s = live_count_;
  if (s == 0) throw std::invalid_argument("empty sample set");
  const long base = std::max<long>(0, (static_cast<long>(s) - 3) / 2);
  Vec out(d_);
  if (s % 2 == 1) {
    const long off = static_cast<long>((s - 1) / 2) - base;
    for (std::size_t j = 0; j < d_; ++j) out[j] = central_[j * 3 + off];
  } else {
    const long off = static_cast<long>(s / 2 - 1) - base;
    for (std::size_t j = 0; j < d_; ++j) {
      const double lo = central_[j * 3 + off];
      const double hi = central_[j * 3 + off + 1];
      out[j] = (lo + hi) / 2;
    }
  }
  return out;
}

void ColumnOrderIndex::loo_median_into(std::size_t i, std::span<double> out) const {
  if (i >= m_ || !live_[i]) throw std::invalid_argument("dead or out-of-range row id");
  if (live_count_ < 2) throw std::invalid_argument("cannot drop the last live row");
  if (out.size() != d_) throw std::invalid_argument("output length mismatch");
  const std::size_t s = live_count_;
  const long base = std::max<long>(0, (static_cast<long>(s) - 3) / 2);
  if (s % 2 == 0) {
    // s-1 survivors, odd count: single middle at m0, shifted when the removed
    // rank sits at or below it.
    const std::size_t m0 = (s - 2) / 2;
    const long off = static_cast<long>(m0) - base;
    for (std::size_t j = 0; j < d_; ++j) {
      const std::uint32_t r = live_rank_[j * m_ + i];
      out[j] = (r <= m0) ? central_[j * 3 + off + 1] : central_[j * 3 + off];
    }
  } else {
    // s-1 survivors, even count: mean of positions lo/hi of the shifted order.
    const std::size_t lo = (s - 3) / 2, hi = lo + 1;
    for (std::size_t j = 0; j < d_; ++j) {
      const std::uint32_t r = live_rank_[j * m_ + i];
      const double* cen = central_.data() + j * 3;
      const double wlo = (lo < r) ? cen[0] : cen[1];
      const double whi = (hi < r) ? cen[1] : cen[2];
      out[j] = (wlo + whi) / 2;
    }
  }
}

Vec loo_median(const ColumnOrderIndex& index, const GradientMatrix& g, std::size_t i) {
  if (index.rows() != g.rows || index.cols() != g.cols)
    throw std::invalid_argument("index/matrix shape mismatch");
  Vec out(g.cols);
  index.loo_median_into(i, out);
  return out;
}

namespace {

double gm_objective(const GradientMatrix& g, const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.rows; ++i) s += l2_distance(g.row(i), y);
  return s;
}

}  // namespace

GeometricMedianResult geometric_median(const GradientMatrix& g, double tol,
                                       std::size_t max_iter) {
  validate_gradients(g);
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  const std::size_t m = g.rows, d = g.cols;

  GeometricMedianResult res;
  if (m == 1) {
    res.point.assign(g.row(0).begin(), g.row(0).end());
    res.converged = true;
    res.objective_trace.push_back(0.0);
    return res;
  }

  Vec range(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double lo = g(0, j), hi = g(0, j);
    for (std::size_t i = 1; i < m; ++i) {
      lo = std::min(lo, g(i, j));
      hi = std::max(hi, g(i, j));
    }
    range[j] = hi - lo;
  }
  const bool degenerate = *std::max_element(range.begin(), range.end()) == 0.0;

  Vec y(d, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) y[j] += g(i, j);
  for (double& v : y) v /= static_cast<double>(m);

  res.objective_trace.push_back(gm_objective(g, y));
  if (degenerate) {  // all points identical: centroid is already the minimizer
    res.point = y;
    res.converged = true;
    return res;
  }

  Vec dist(m), z(d);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      dist[i] = l2_distance(g.row(i), y);
      dmin = std::min(dmin, dist[i]);
    }
    if (dmin < 1e-12) {  // anchor singularity: nudge off the data point
      for (std::size_t j = 0; j < d; ++j) y[j] += 1e-9 * range[j];
      for (std::size_t i = 0; i < m; ++i) dist[i] = l2_distance(g.row(i), y);
    }
    std::fill(z.begin(), z.end(), 0.0);
    double wsum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double w = 1.0 / std::max(dist[i], 1e-300);
      wsum += w;
      for (std::size_t j = 0; j < d; ++j) z[j] += w * g(i, j);
    }
    for (double& v : z) v /= wsum;

    const double step = l2_distance(z, y);
    y = z;
    res.iterations = it;
    res.objective_trace.push_back(gm_objective(g, y));
    if (step < tol) {
      res.converged = true;
      break;
    }
  }
  res.point = y;
  return res;
}

}  // namespace medix
