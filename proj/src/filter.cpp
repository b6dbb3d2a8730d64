#include "medix/filter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "medix/io.hpp"
#include "medix/median.hpp"
#include "medix/parallel.hpp"

namespace medix {

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::max_iter: return "max_iter";
    case StopReason::exhausted: return "exhausted";
  }
  return "unknown";
}

namespace {

void validate_config(const FilterConfig& cfg, std::size_t m) {
  if (cfg.eps_stop <= 0.0) throw std::invalid_argument("eps_stop must be positive");
  if (cfg.k < 1) throw std::invalid_argument("k must be >= 1");
  if (cfg.T < 1) throw std::invalid_argument("T must be >= 1");
  if (m <= cfg.k) throw std::invalid_argument("wild set smaller than removal batch");
}

// Rows of g selected by ids.
GradientMatrix submatrix(const GradientMatrix& g, const std::vector<std::uint32_t>& ids) {
  GradientMatrix out(ids.size(), g.cols);
  for (std::size_t t = 0; t < ids.size(); ++t)
    std::copy(g.row(ids[t]).begin(), g.row(ids[t]).end(), out.row(t).begin());
  return out;
}

double gm_distance(const GradientMatrix& g, std::span<const double> ref) {
  return l2_distance(geometric_median(g, 1e-9, 200).point, ref);
}

// Top-k ids by (delta desc, id asc); delta is indexed by position in live.
std::vector<std::uint32_t> select_top_k(const std::vector<std::uint32_t>& live,
                                        const Vec& delta, std::size_t k) {
  std::vector<std::size_t> pos(live.size());
  for (std::size_t t = 0; t < pos.size(); ++t) pos[t] = t;
  const auto better = [&](std::size_t a, std::size_t b) {
    if (delta[a] != delta[b]) return delta[a] > delta[b];
    return live[a] < live[b];
  };
  std::partial_sort(pos.begin(), pos.begin() + k, pos.end(), better);
  std::vector<std::uint32_t> out(k);
  for (std::size_t t = 0; t < k; ++t) out[t] = live[pos[t]];
  return out;
}

}  // namespace

FilterResult medix_filter(const GradientMatrix& gradients, std::span<const double> ref_grad,
                          const FilterConfig& cfg, Aggregator agg, unsigned threads) {
  validate_gradients(gradients);
  if (gradients.cols != ref_grad.size())
    throw std::invalid_argument("gradient dimension mismatch");
  const std::size_t m = gradients.rows;
  validate_config(cfg, m);

  const bool use_ewm = agg == Aggregator::element_wise_median;
  ColumnOrderIndex index;
  if (use_ewm) index = ColumnOrderIndex::build(gradients);

  std::vector<std::uint32_t> live(m);
  for (std::size_t i = 0; i < m; ++i) live[i] = static_cast<std::uint32_t>(i);

  FilterResult res;
  Vec delta(m);
  std::size_t t = 0;
  while (true) {
    const std::size_t s = live.size();
    double d_t;
    if (use_ewm) {
      d_t = l2_distance(index.live_median(), ref_grad);
      parallel_chunks(s, threads, [&](std::size_t begin, std::size_t end) {
        Vec loo(gradients.cols);
        for (std::size_t q = begin; q < end; ++q) {
          index.loo_median_into(live[q], loo);
          delta[q] = d_t - l2_distance(loo, ref_grad);
        }
      });
    } else {
      const GradientMatrix gs = submatrix(gradients, live);
      d_t = gm_distance(gs, ref_grad);
      parallel_chunks(s, threads, [&](std::size_t begin, std::size_t end) {
        GradientMatrix sub(s - 1, gradients.cols);
        for (std::size_t q = begin; q < end; ++q) {
          std::size_t r = 0;
          for (std::size_t u = 0; u < s; ++u) {
            if (u == q) continue;
            std::copy(gs.row(u).begin(), gs.row(u).end(), sub.row(r++).begin());
          }
          delta[q] = d_t - gm_distance(sub, ref_grad);
        }
      });
    }

    double delta_max = delta[0];
    for (std::size_t q = 1; q < s; ++q) delta_max = std::max(delta_max, delta[q]);

    if (!(delta_max > cfg.eps_stop)) {
      res.trace.push_back({t, d_t, delta_max, {}});
      res.stop_reason = StopReason::converged;
      break;
    }

    std::vector<std::uint32_t> removed = select_top_k(live, delta, cfg.k);
    res.trace.push_back({t, d_t, delta_max, removed});
    res.outlier_ids.insert(res.outlier_ids.end(), removed.begin(), removed.end());
    if (use_ewm) index.remove_rows(removed);
    {
      std::vector<std::uint32_t> next;
      next.reserve(live.size() - removed.size());
      std::vector<char> gone(m, 0);
      for (std::uint32_t id : removed) gone[id] = 1;
      for (std::uint32_t id : live)
        if (!gone[id]) next.push_back(id);
      live.swap(next);
    }
    ++t;
    if (t >= cfg.T) {
      res.stop_reason = StopReason::max_iter;
      break;
    }
    if (live.size() <= cfg.k) {
      res.stop_reason = StopReason::exhausted;
      break;
    }
  }

  res.survivor_ids = live;  // kept in ascending id order throughout
  std::sort(res.outlier_ids.begin(), res.outlier_ids.end());
  return res;
}

FilterResult medix_filter(const WildSet& wild, std::span<const double> ref_grad,
                          const FilterConfig& cfg, Aggregator agg, unsigned threads) {
  if (wild.gradients.rows != wild.size())
    throw std::invalid_argument("wild gradients missing; compute them first");
  return medix_filter(wild.gradients, ref_grad, cfg, agg, threads);
}

std::vector<DeviationPoint> deviation_sweep(const WildSet& ind_pool, const WildSet& ood_pool,
                                            std::span<const double> ref_grad,
                                            std::span<const std::size_t> steps) {
  validate_gradients(ind_pool.gradients);
  validate_gradients(ood_pool.gradients);
  if (ind_pool.gradients.cols != ref_grad.size() ||
      ood_pool.gradients.cols != ref_grad.size())
    throw std::invalid_argument("gradient dimension mismatch");
  for (std::size_t t = 1; t < steps.size(); ++t)
    if (steps[t] < steps[t - 1]) throw std::invalid_argument("steps must be non-decreasing");

  const std::size_t m_in = ind_pool.gradients.rows;
  const std::size_t d = ref_grad.size();
  std::vector<DeviationPoint> out;
  out.reserve(steps.size());
  for (std::size_t n : steps) {
    if (n > ood_pool.gradients.rows)
      throw std::invalid_argument("step exceeds OOD pool size");
    GradientMatrix mix(m_in + n, d);
    std::copy(ind_pool.gradients.values.begin(), ind_pool.gradients.values.end(),
              mix.values.begin());
    std::copy(ood_pool.gradients.values.begin(),
              ood_pool.gradients.values.begin() + n * d,
              mix.values.begin() + m_in * d);
    out.push_back({n, l2_distance(element_wise_median(mix), ref_grad)});
  }
  return out;
}

ErrRates err_rates(const FilterResult& result, const WildSet& wild) {
  if (wild.origin.size() != wild.size())
    throw std::invalid_argument("wild set has no origin tags");
  std::size_t m_in = 0, m_out = 0;
  for (Origin o : wild.origin) (o == Origin::ind ? m_in : m_out)++;

  std::size_t flagged_ind = 0, surviving_ood = 0;
  for (std::uint32_t id : result.outlier_ids)
    flagged_ind += (wild.origin[id] == Origin::ind);
  for (std::uint32_t id : result.survivor_ids)
    surviving_ood += (wild.origin[id] == Origin::ood);

  ErrRates rates;
  if (m_in > 0)
    rates.err_in = static_cast<double>(flagged_ind) / static_cast<double>(m_in);
  if (m_out > 0)
    rates.err_out = static_cast<double>(surviving_ood) / static_cast<double>(m_out);
  return rates;
}

void write_filter_json(const FilterResult& result, const std::string& path) {
  nlohmann::json j;
  j["outlier_ids"] = result.outlier_ids;
  j["survivor_ids"] = result.survivor_ids;
  j["stop_reason"] = stop_reason_name(result.stop_reason);
  j["iterations"] = result.trace.size();
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << j.dump(2) << '\n';
}

FilterResult read_filter_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  f >> j;
  FilterResult res;
  res.outlier_ids = j.at("outlier_ids").get<std::vector<std::uint32_t>>();
  res.survivor_ids = j.at("survivor_ids").get<std::vector<std::uint32_t>>();
  const std::string reason = j.at("stop_reason").get<std::string>();
  if (reason == "converged") res.stop_reason = StopReason::converged;
  else if (reason == "max_iter") res.stop_reason = StopReason::max_iter;
  else if (reason == "exhausted") res.stop_reason = StopReason::exhausted;
  else throw std::runtime_error("unknown stop_reason in " + path);
  return res;
}

void write_trace_csv(const FilterResult& result, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "iter,d_t,delta_max,removed_ids\n";
  for (const TraceRow& row : result.trace) {
    f << row.iter << ',' << format_double(row.d_t) << ',' << format_double(row.delta_max)
      << ',';
    for (std::size_t t = 0; t < row.removed.size(); ++t) {
      if (t) f << ';';
      f << row.removed[t];
    }
    f << '\n';
  }
}

}  // namespace medix
