#pragma once
// Iterative greedy outlier extraction by leave-one-out EWM deviation, plus the
// deviation sweep and error-rate accounting.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medix/dataset.hpp"
#include "medix/matrix.hpp"

namespace medix {

struct FilterConfig {
  double eps_stop = 5e-3;  // stop once the best leave-one-out drop falls to this
  std::size_t k = 1;       // removals per iteration
  std::size_t T = 40;      // max iterations
};

// Harness default: k = max(1, m/20).
inline std::size_t default_k(std::size_t m) { return std::max<std::size_t>(1, m / 20); }

enum class StopReason { converged, max_iter, exhausted };
const char* stop_reason_name(StopReason r);

struct TraceRow {
  std::size_t iter = 0;
  double d_t = 0.0;        // ||EWM(G_S) - ref|| before any removal this iteration
  double delta_max = 0.0;  // best leave-one-out drop of this iteration
  std::vector<std::uint32_t> removed;  // ids removed, selection order
};

struct FilterResult {
  std::vector<std::uint32_t> outlier_ids;   // ascending
  std::vector<std::uint32_t> survivor_ids;  // ascending
  std::vector<TraceRow> trace;
  StopReason stop_reason = StopReason::converged;
};

enum class Aggregator { element_wise_median, geometric_median };

// Iterative greedy extraction on raw gradients:
// repeat { d_t = ||agg(G_S) - ref||; delta_i = d_t - ||agg(G_S\{i}) - ref||;
// remove top-k by delta_i (ties by ascending row id) } while delta_max >
// eps_stop, t < T, and |S| > k. The EWM aggregator runs on the O(d)
// leave-one-out index; results are independent of `threads`.
FilterResult medix_filter(const GradientMatrix& gradients, std::span<const double> ref_grad,
                          const FilterConfig& cfg,
                          Aggregator agg = Aggregator::element_wise_median,
                          unsigned threads = 1);

// Convenience overload reading wild.gradients.
FilterResult medix_filter(const WildSet& wild, std::span<const double> ref_grad,
                          const FilterConfig& cfg,
                          Aggregator agg = Aggregator::element_wise_median,
                          unsigned threads = 1);

struct DeviationPoint {
  std::size_t n_ood = 0;
  double deviation = 0.0;  // ||ref - EWM(ind pool + first n_ood OOD)||
};

std::vector<DeviationPoint> deviation_sweep(const WildSet& ind_pool, const WildSet& ood_pool,
                                            std::span<const double> ref_grad,
                                            std::span<const std::size_t> steps);

struct ErrRates {
  std::optional<double> err_in;   // flagged InD / m_in; empty when m_in = 0
  std::optional<double> err_out;  // surviving OOD / m_out; empty when m_out = 0
};

ErrRates err_rates(const FilterResult& result, const WildSet& wild);

// JSON result (ids + stop reason) and trace CSV `iter,d_t,delta_max,removed_ids`
// with removed ids ';'-joined inside the field.
void write_filter_json(const FilterResult& result, const std::string& path);
void write_trace_csv(const FilterResult& result, const std::string& path);
FilterResult read_filter_json(const std::string& path);

}  // namespace medix
