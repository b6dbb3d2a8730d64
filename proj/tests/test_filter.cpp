#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "medix/filter.hpp"
#include "medix/median.hpp"
#include "support.hpp"

using namespace medix;
using namespace testsupport;

namespace {

// Wild set whose gradient rows are handed in directly; origin marks the last
// n_ood rows as OOD.
WildSet wild_from(const GradientMatrix& g, std::size_t n_ood) {
  WildSet w;
  w.features = Matrix(g.rows, 1);
  w.gradients = g;
  w.origin.assign(g.rows, Origin::ind);
  for (std::size_t i = g.rows - n_ood; i < g.rows; ++i) w.origin[i] = Origin::ood;
  return w;
}

// Planted instance: rows near ref except `ood` ids pushed far out along +e0.
GradientMatrix planted(std::size_t m, std::size_t d, const std::vector<std::size_t>& ood,
                       std::uint64_t seed, double shift = 25.0) {
  GradientMatrix g = random_matrix(m, d, seed);
  for (std::size_t i : ood) g(i, 0) += shift;
  return g;
}

bool same_trace(const std::vector<TraceRow>& got, const std::vector<OracleTraceRow>& want) {
  if (got.size() != want.size()) return false;
  for (std::size_t r = 0; r < got.size(); ++r) {
    if (got[r].iter != want[r].iter) return false;
    if (got[r].d_t != want[r].d_t) return false;
    if (got[r].delta_max != want[r].delta_max) return false;
    if (got[r].removed != want[r].removed) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("a clean wild set is a fixed point") {
  // Every row equals the reference, so d_0 = 0 and no delta can exceed the
  // stopping tolerance.
  GradientMatrix g(12, 3);
  const Vec ref = {0.5, -1.25, 2.0};
  for (std::size_t i = 0; i < g.rows; ++i)
    std::copy(ref.begin(), ref.end(), g.row(i).begin());
  const FilterResult res = medix_filter(g, ref, FilterConfig{});
  CHECK(res.stop_reason == StopReason::converged);
  CHECK(res.outlier_ids.empty());
  CHECK(res.survivor_ids.size() == 12);
  REQUIRE(res.trace.size() == 1);
  CHECK(res.trace[0].d_t == 0.0);
  CHECK(res.trace[0].removed.empty());
}

TEST_CASE("hand-checkable six-row instance matches the oracle bitwise") {
  GradientMatrix g(6, 2);
  const double data[6][2] = {{0.1, 0.0},  {-0.1, 0.1}, {0.0, -0.1},
                             {10.0, 9.0}, {0.05, 0.05}, {-9.0, 11.0}};
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 2; ++j) g(i, j) = data[i][j];
  const Vec ref = {0.0, 0.0};
  FilterConfig cfg;
  cfg.eps_stop = 1e-3;
  cfg.k = 1;
  cfg.T = 10;
  const FilterResult res = medix_filter(g, ref, cfg);
  const OracleResult want = naive_filter(g, ref, cfg.eps_stop, cfg.k, cfg.T);
  CHECK(res.outlier_ids == want.outlier_ids);
  CHECK(res.survivor_ids == want.survivor_ids);
  CHECK(stop_reason_name(res.stop_reason) == want.stop_reason);
  CHECK(same_trace(res.trace, want.trace));
  // The grossly shifted row 3 is extracted.
  CHECK(std::find(res.outlier_ids.begin(), res.outlier_ids.end(), 3u) != res.outlier_ids.end());
}

TEST_CASE("fast filter equals the full-recompute oracle across random instances") {
  // Mixed continuous and lattice-valued (duplicate-heavy) gradients, odd and
  // even live counts, several k and T settings.
  for (std::uint64_t inst = 0; inst < 25; ++inst) {
    const std::size_t m = 8 + (inst * 7) % 29;
    const std::size_t d = 1 + inst % 5;
    GradientMatrix g = inst % 2 == 0 ? random_matrix(m, d, 100 + inst)
                                     : random_lattice_matrix(m, d, 100 + inst);
    if (inst % 3 == 0)
      for (std::size_t i = 0; i < m; i += 5) g(i, 0) += 6.0;
    Vec ref(d, 0.0);
    FilterConfig cfg;
    cfg.eps_stop = inst % 4 == 0 ? 1e-6 : 5e-3;
    cfg.k = 1 + inst % 3;
    cfg.T = 1 + inst % 7;
    if (m <= cfg.k) continue;
    const FilterResult res = medix_filter(g, ref, cfg);
    const OracleResult want = naive_filter(g, ref, cfg.eps_stop, cfg.k, cfg.T);
    CAPTURE(inst);
    CHECK(res.outlier_ids == want.outlier_ids);
    CHECK(res.survivor_ids == want.survivor_ids);
    CHECK(stop_reason_name(res.stop_reason) == want.stop_reason);
    CHECK(same_trace(res.trace, want.trace));
  }
}

TEST_CASE("filter validates its inputs") {
  const GradientMatrix g = random_matrix(6, 2, 1);
  const Vec short_ref = {0.0};
  CHECK_THROWS_AS(medix_filter(g, short_ref, FilterConfig{}), std::invalid_argument);
  FilterConfig cfg;
  cfg.k = 6;
  CHECK_THROWS_WITH_AS(medix_filter(g, Vec{0.0, 0.0}, cfg),
                       "wild set smaller than removal batch", std::invalid_argument);
  cfg.k = 0;
  CHECK_THROWS_AS(medix_filter(g, Vec{0.0, 0.0}, cfg), std::invalid_argument);
  cfg.k = 1;
  cfg.eps_stop = -1.0;
  CHECK_THROWS_AS(medix_filter(g, Vec{0.0, 0.0}, cfg), std::invalid_argument);
  GradientMatrix bad = g;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(medix_filter(bad, Vec{0.0, 0.0}, FilterConfig{}), std::invalid_argument);
}

TEST_CASE("every removal round extracts exactly k ids") {
  const GradientMatrix g = planted(40, 3, {1, 7, 9, 13, 22, 30, 31, 38}, 55);
  FilterConfig cfg;
  cfg.eps_stop = 1e-9;
  cfg.k = 3;
  cfg.T = 5;
  const FilterResult res = medix_filter(g, Vec(3, 0.0), cfg);
  std::size_t removed_total = 0;
  for (const TraceRow& row : res.trace) {
    if (row.removed.empty()) continue;  // terminal converged row
    CHECK(row.removed.size() == cfg.k);
    removed_total += row.removed.size();
  }
  CHECK(removed_total == res.outlier_ids.size());
  CHECK(res.outlier_ids.size() + res.survivor_ids.size() == g.rows);
  CHECK(std::is_sorted(res.outlier_ids.begin(), res.outlier_ids.end()));
  CHECK(std::is_sorted(res.survivor_ids.begin(), res.survivor_ids.end()));
}

TEST_CASE("trace rows replay exactly against fresh medians") {
  const GradientMatrix g = planted(30, 2, {2, 11, 17, 25}, 77);
  const Vec ref = {0.1, -0.2};
  FilterConfig cfg;
  cfg.eps_stop = 1e-4;
  cfg.k = 2;
  cfg.T = 8;
  const FilterResult res = medix_filter(g, ref, cfg);

  std::vector<char> alive(g.rows, 1);
  for (const TraceRow& row : res.trace) {
    const double d_t = naive_distance(naive_ewm(g, &alive), ref);
    CHECK(row.d_t == d_t);
    double delta_max = -1e300;
    for (std::size_t i = 0; i < g.rows; ++i) {
      if (!alive[i]) continue;
      delta_max = std::max(delta_max, d_t - naive_distance(naive_ewm(g, &alive, i), ref));
    }
    CHECK(row.delta_max == delta_max);
    for (std::uint32_t id : row.removed) alive[id] = 0;
  }
}

TEST_CASE("stop reasons cover convergence, iteration cap, and exhaustion") {
  const Vec ref2 = {0.0, 0.0};

  const GradientMatrix clean = random_matrix(10, 2, 3);
  FilterConfig lax;
  lax.eps_stop = 100.0;
  CHECK(medix_filter(clean, ref2, lax).stop_reason == StopReason::converged);

  const GradientMatrix spread = planted(20, 2, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 4, 50.0);
  FilterConfig one_round;
  one_round.eps_stop = 1e-12;
  one_round.k = 1;
  one_round.T = 1;
  const FilterResult capped = medix_filter(spread, ref2, one_round);
  CHECK(capped.stop_reason == StopReason::max_iter);
  CHECK(capped.outlier_ids.size() == 1);

  // 10 rows, k = 4: after round one 6 live, after round two 2 <= k live.
  const GradientMatrix ten = planted(10, 2, {0, 1, 2, 3, 4, 5, 6, 7}, 5, 50.0);
  FilterConfig big_k;
  big_k.eps_stop = 1e-12;
  big_k.k = 4;
  big_k.T = 100;
  const FilterResult done = medix_filter(ten, ref2, big_k);
  CHECK(done.stop_reason == StopReason::exhausted);
  CHECK(done.outlier_ids.size() == 8);
  CHECK(done.survivor_ids.size() == 2);

  // When the iteration cap and exhaustion fire together, the cap wins.
  FilterConfig both;
  both.eps_stop = 1e-12;
  both.k = 4;
  both.T = 2;
  CHECK(medix_filter(ten, ref2, both).stop_reason == StopReason::max_iter);

  CHECK(std::string(stop_reason_name(StopReason::converged)) == "converged");
  CHECK(std::string(stop_reason_name(StopReason::max_iter)) == "max_iter");
  CHECK(std::string(stop_reason_name(StopReason::exhausted)) == "exhausted");
}

TEST_CASE("results are independent of the thread count") {
  const GradientMatrix g = planted(60, 4, {3, 12, 20, 33, 41, 55}, 91);
  const Vec ref(4, 0.0);
  FilterConfig cfg;
  cfg.eps_stop = 1e-6;
  cfg.k = 2;
  cfg.T = 12;
  const FilterResult a = medix_filter(g, ref, cfg, Aggregator::element_wise_median, 1);
  const FilterResult b = medix_filter(g, ref, cfg, Aggregator::element_wise_median, 4);
  CHECK(a.outlier_ids == b.outlier_ids);
  CHECK(a.survivor_ids == b.survivor_ids);
  CHECK(a.stop_reason == b.stop_reason);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t r = 0; r < a.trace.size(); ++r) {
    CHECK(a.trace[r].d_t == b.trace[r].d_t);
    CHECK(a.trace[r].delta_max == b.trace[r].delta_max);
    CHECK(a.trace[r].removed == b.trace[r].removed);
  }
}

TEST_CASE("wild-set overload and error-rate accounting") {
  // Inlier coordinates alternate sign by (row + column) parity, so every
  // inlier sits at or below one column median while the planted rows sit
  // above all of them; each LOO round then strictly prefers planted rows.
  const std::size_t m = 24, n_ood = 6;
  GradientMatrix g = random_matrix(m, 2, 8);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const double mag = 0.2 + 0.3 * (g(i, j) + 1.0);
      g(i, j) = ((i + j) % 2 == 0) ? mag : -mag;
    }
  for (std::size_t i = m - n_ood; i < m; ++i)
    for (std::size_t j = 0; j < 2; ++j) g(i, j) = 30.0 + g(i, j);
  WildSet wild = wild_from(g, n_ood);

  WildSet no_grads = wild;
  no_grads.gradients = GradientMatrix();
  CHECK_THROWS_WITH_AS(medix_filter(no_grads, Vec(2, 0.0), FilterConfig{}),
                       "wild gradients missing; compute them first", std::invalid_argument);

  FilterConfig cfg;
  cfg.eps_stop = 1e-6;
  cfg.k = 2;
  cfg.T = 3;
  const FilterResult res = medix_filter(wild, Vec(2, 0.0), cfg);
  CHECK(res.outlier_ids == medix_filter(g, Vec(2, 0.0), cfg).outlier_ids);

  // Perfect recovery of the planted rows -> both error rates are zero.
  const ErrRates perfect = err_rates(res, wild);
  REQUIRE(perfect.err_in.has_value());
  REQUIRE(perfect.err_out.has_value());
  CHECK(*perfect.err_in == 0.0);
  CHECK(*perfect.err_out == 0.0);

  // No removals: err_in 0, err_out 1.
  FilterResult none;
  none.survivor_ids.resize(m);
  for (std::size_t i = 0; i < m; ++i) none.survivor_ids[i] = static_cast<std::uint32_t>(i);
  const ErrRates idle = err_rates(none, wild);
  CHECK(*idle.err_in == 0.0);
  CHECK(*idle.err_out == 1.0);

  // Single-origin wild sets leave the other side's rate empty.
  WildSet all_ood = wild;
  std::fill(all_ood.origin.begin(), all_ood.origin.end(), Origin::ood);
  const ErrRates eo = err_rates(none, all_ood);
  CHECK_FALSE(eo.err_in.has_value());
  CHECK(*eo.err_out == 1.0);
  WildSet all_ind = wild;
  std::fill(all_ind.origin.begin(), all_ind.origin.end(), Origin::ind);
  const ErrRates ei = err_rates(none, all_ind);
  CHECK(*ei.err_in == 0.0);
  CHECK_FALSE(ei.err_out.has_value());

  WildSet untagged = wild;
  untagged.origin.clear();
  CHECK_THROWS_WITH_AS(err_rates(none, untagged), "wild set has no origin tags",
                       std::invalid_argument);
}

TEST_CASE("deviation sweep grows with the injected OOD mass") {
  const std::size_t d = 4;
  // Symmetric InD pool: pairs x and -x, so the EWM is exactly 0 = ref and the
  // deviation at n_ood = 0 vanishes.
  GradientMatrix ind(10, d);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double v = 0.1 * static_cast<double>(i + 1) + 0.01 * static_cast<double>(j);
      ind(2 * i, j) = v;
      ind(2 * i + 1, j) = -v;
    }
  GradientMatrix ood(15, d);
  for (std::size_t i = 0; i < 15; ++i)
    for (std::size_t j = 0; j < d; ++j) ood(i, j) = 8.0;

  WildSet ind_pool = wild_from(ind, 0);
  WildSet ood_pool = wild_from(ood, 15);
  const Vec ref(d, 0.0);

  // The last step makes OOD a strict majority of the 21-row pool, so every
  // column median lands on the OOD point exactly.
  const std::vector<std::size_t> steps = {0, 2, 4, 6, 8, 11};
  const auto pts = deviation_sweep(ind_pool, ood_pool, ref, steps);
  REQUIRE(pts.size() == steps.size());
  CHECK(pts[0].n_ood == 0);
  CHECK(pts[0].deviation == 0.0);
  for (std::size_t q = 0; q < pts.size(); ++q) {
    // Oracle: naive EWM over the mixed pool.
    GradientMatrix mixed(10 + steps[q], d);
    for (std::size_t i = 0; i < 10; ++i)
      std::copy(ind.row(i).begin(), ind.row(i).end(), mixed.row(i).begin());
    for (std::size_t i = 0; i < steps[q]; ++i)
      std::copy(ood.row(i).begin(), ood.row(i).end(), mixed.row(10 + i).begin());
    CHECK(pts[q].deviation == naive_distance(naive_ewm(mixed), ref));
  }
  CHECK(pts.back().deviation == std::sqrt(static_cast<double>(d)) * 8.0);
  CHECK(pts.back().deviation >= pts[1].deviation);

  const std::vector<std::size_t> decreasing = {4, 2};
  CHECK_THROWS_WITH_AS(deviation_sweep(ind_pool, ood_pool, ref, decreasing),
                       "steps must be non-decreasing", std::invalid_argument);
  const std::vector<std::size_t> toobig = {16};
  CHECK_THROWS_WITH_AS(deviation_sweep(ind_pool, ood_pool, ref, toobig),
                       "step exceeds OOD pool size", std::invalid_argument);
}

TEST_CASE("filter results round-trip through JSON and the trace through CSV") {
  const GradientMatrix g = planted(15, 2, {4, 9, 10}, 21);
  FilterConfig cfg;
  cfg.eps_stop = 1e-6;
  cfg.k = 1;
  cfg.T = 6;
  const FilterResult res = medix_filter(g, Vec(2, 0.0), cfg);
  const TempDir dir("filterio");
  write_filter_json(res, dir.file("filter.json"));
  const FilterResult back = read_filter_json(dir.file("filter.json"));
  CHECK(back.outlier_ids == res.outlier_ids);
  CHECK(back.survivor_ids == res.survivor_ids);
  CHECK(back.stop_reason == res.stop_reason);

  write_trace_csv(res, dir.file("trace.csv"));
  const std::string text = read_file(dir.file("trace.csv"));
  const std::size_t lines = static_cast<std::size_t>(
      std::count(text.begin(), text.end(), '\n'));
  CHECK(lines == res.trace.size() + 1);
  CHECK(text.rfind("iter,d_t,delta_max,removed_ids", 0) == 0);
}

TEST_CASE("EWM and geometric median agree exactly on symmetric 1-D data") {
  // Median and Weiszfeld fixed point are both 0 for {-3,-1,1,3}: the EWM by
  // the even-count rule, the GM because the centroid 0 is already stationary.
  GradientMatrix g(4, 1);
  g(0, 0) = -3.0;
  g(1, 0) = -1.0;
  g(2, 0) = 1.0;
  g(3, 0) = 3.0;
  CHECK(element_wise_median(g) == Vec{0.0});
  CHECK(geometric_median(g).point == Vec{0.0});
  const Vec ref = {0.0};
  const FilterResult ewm = medix_filter(g, ref, FilterConfig{}, Aggregator::element_wise_median);
  const FilterResult gm = medix_filter(g, ref, FilterConfig{}, Aggregator::geometric_median);
  CHECK(ewm.stop_reason == StopReason::converged);
  CHECK(gm.stop_reason == StopReason::converged);
  CHECK(ewm.outlier_ids == gm.outlier_ids);
  CHECK(ewm.trace[0].d_t == gm.trace[0].d_t);
}
