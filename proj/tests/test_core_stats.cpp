#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "medix/median.hpp"
#include "medix/rng.hpp"
#include "medix/stats.hpp"
#include "support.hpp"

using namespace medix;
using namespace testsupport;

namespace {

GradientMatrix from_rows(const std::vector<Vec>& rows) {
  GradientMatrix g(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(), g.row(i).begin());
  return g;
}

double gm_objective(const GradientMatrix& g, const Vec& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.rows; ++i) s += l2_distance(x, g.row(i));
  return s;
}

// Zooming grid search for the 2-D geometric median: repeatedly scans a
// 41x41 grid and shrinks the window around the best cell.
Vec grid_search_gm(const GradientMatrix& g) {
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < g.rows; ++i) {
    cx += g(i, 0);
    cy += g(i, 1);
  }
  cx /= static_cast<double>(g.rows);
  cy /= static_cast<double>(g.rows);
  double half = 2.0;
  for (int stage = 0; stage < 12; ++stage) {
    double best = 1e300, bx = cx, by = cy;
    for (int a = -20; a <= 20; ++a)
      for (int b = -20; b <= 20; ++b) {
        const Vec x = {cx + half * a / 20.0, cy + half * b / 20.0};
        const double obj = gm_objective(g, x);
        if (obj < best) {
          best = obj;
          bx = x[0];
          by = x[1];
        }
      }
    cx = bx;
    cy = by;
    half /= 10.0;
  }
  return {cx, cy};
}

}  // namespace

TEST_CASE("element_wise_median handles odd, even, and single-row inputs") {
  CHECK(element_wise_median(from_rows({{1, 5}, {2, 4}, {3, 3}})) == Vec{2, 4});
  CHECK(element_wise_median(from_rows({{1, 0}, {3, 0}})) == Vec{2, 0});
  CHECK(element_wise_median(from_rows({{7, -2}})) == Vec{7, -2});
}

TEST_CASE("element_wise_median rejects empty and non-finite input") {
  CHECK_THROWS_WITH_AS(element_wise_median(GradientMatrix{}), "empty sample set",
                       std::invalid_argument);
  GradientMatrix g = from_rows({{1, 2}, {3, 4}});
  g(1, 0) = std::nan("");
  CHECK_THROWS_WITH_AS(element_wise_median(g), "non-finite gradient",
                       std::invalid_argument);
  g(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(element_wise_median(g), "non-finite gradient",
                       std::invalid_argument);
}

TEST_CASE("element_wise_median is permutation invariant") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GradientMatrix g = random_matrix(11 + seed, 4, seed);
    const Vec base = element_wise_median(g);

    std::vector<std::size_t> perm(g.rows);
    std::iota(perm.begin(), perm.end(), 0);
    rng::Philox shuffle(seed, 1);
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[shuffle.below(i)]);
    GradientMatrix h(g.rows, g.cols);
    for (std::size_t i = 0; i < g.rows; ++i)
      std::copy(g.row(perm[i]).begin(), g.row(perm[i]).end(), h.row(i).begin());
    CHECK(element_wise_median(h) == base);
  }
}

TEST_CASE("element_wise_median is scale equivariant") {
  const GradientMatrix g = random_matrix(10, 3, 7);
  const Vec base = element_wise_median(g);
  for (double c : {2.5, -1.75, 0.0, -3.0}) {
    GradientMatrix h = g;
    for (double& v : h.values) v *= c;
    const Vec scaled = element_wise_median(h);
    for (std::size_t j = 0; j < base.size(); ++j)
      CHECK(scaled[j] == doctest::Approx(c * base[j]).epsilon(1e-12));
  }
}

TEST_CASE("column medians stay inside any interval holding a strict majority") {
  // Corrupt just under half the rows with arbitrary huge values; the median
  // of each column must stay inside the clean band.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::size_t m = 21;
    GradientMatrix g(m, 3);
    rng::Philox rng(seed, 2);
    for (double& v : g.values) v = 5.0 + rng.uniform();  // clean band [5, 6]
    const std::size_t corrupt = m / 2;  // 10 of 21: strictly less than half
    for (std::size_t i = 0; i < corrupt; ++i)
      for (std::size_t j = 0; j < g.cols; ++j)
        g(i, j) = (rng.uniform() < 0.5 ? -1.0 : 1.0) * 1e9 * (1.0 + rng.uniform());
    const Vec med = element_wise_median(g);
    for (double v : med) {
      CHECK(v >= 5.0);
      CHECK(v <= 6.0);
    }
  }
}

TEST_CASE("median coordinates lie within their column ranges") {
  const GradientMatrix g = random_matrix(14, 5, 3);
  const Vec med = element_wise_median(g);
  for (std::size_t j = 0; j < g.cols; ++j) {
    double lo = g(0, j), hi = g(0, j);
    for (std::size_t i = 1; i < g.rows; ++i) {
      lo = std::min(lo, g(i, j));
      hi = std::max(hi, g(i, j));
    }
    CHECK(med[j] >= lo);
    CHECK(med[j] <= hi);
  }
}

TEST_CASE("ColumnOrderIndex sorts columns and exposes the inverse ranks") {
  const GradientMatrix g = from_rows({{3, 1, 2}, {1, 2, 2}, {2, 3, 1}});
  const auto index = ColumnOrderIndex::build(g);
  // Column 0 holds [3,1,2]: ascending rows are 1, 2, 0.
  const auto ord0 = index.column_order(0);
  CHECK(std::vector<std::uint32_t>(ord0.begin(), ord0.end()) ==
        std::vector<std::uint32_t>{1, 2, 0});
  // Column 1 is already sorted: identity permutation.
  const auto ord1 = index.column_order(1);
  CHECK(std::vector<std::uint32_t>(ord1.begin(), ord1.end()) ==
        std::vector<std::uint32_t>{0, 1, 2});
  // Column 2 holds [2,2,1]: row 2 first, then the duplicates stable by id.
  const auto ord2 = index.column_order(2);
  CHECK(std::vector<std::uint32_t>(ord2.begin(), ord2.end()) ==
        std::vector<std::uint32_t>{2, 0, 1});
  for (std::size_t j = 0; j < g.cols; ++j) {
    const auto ord = index.column_order(j);
    for (std::uint32_t pos = 0; pos < ord.size(); ++pos)
      CHECK(index.column_rank(j, ord[pos]) == pos);
    for (std::size_t pos = 1; pos < ord.size(); ++pos)
      CHECK(g(ord[pos - 1], j) <= g(ord[pos], j));
  }
}

TEST_CASE("ColumnOrderIndex live bookkeeping matches naive medians") {
  const GradientMatrix g = random_lattice_matrix(17, 4, 9);
  auto index = ColumnOrderIndex::build(g);
  CHECK(index.rows() == 17);
  CHECK(index.live_rows() == 17);
  CHECK(index.live_median() == naive_ewm(g));

  std::vector<std::uint32_t> gone = {0, 5, 11, 16};
  index.remove_rows(gone);
  CHECK(index.live_rows() == 13);
  std::vector<char> alive(g.rows, 1);
  for (auto id : gone) {
    alive[id] = 0;
    CHECK_FALSE(index.is_live(id));
  }
  CHECK(index.live_median() == naive_ewm(g, &alive));

  CHECK_THROWS_AS(index.remove_rows(std::vector<std::uint32_t>{5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(index.remove_rows(std::vector<std::uint32_t>{99}),
                  std::invalid_argument);

  index.restore_all();
  CHECK(index.live_rows() == 17);
  CHECK(index.live_median() == naive_ewm(g));
}

TEST_CASE("loo_median drops exactly one row") {
  const GradientMatrix g = from_rows({{1}, {2}, {3}});
  const auto index = ColumnOrderIndex::build(g);
  CHECK(loo_median(index, g, 2) == Vec{1.5});
  CHECK(loo_median(index, g, 1) == Vec{2});
  CHECK(loo_median(index, g, 0) == Vec{2.5});
  CHECK_THROWS_WITH_AS(loo_median(index, g, 3), "dead or out-of-range row id",
                       std::invalid_argument);
}

TEST_CASE("loo_median equals naive recomputation on 100 random instances") {
  rng::Philox dim_rng(42, 3);
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    const std::size_t m = 5 + dim_rng.below(56);  // 5..60, even and odd
    const std::size_t d = 1 + dim_rng.below(10);
    const GradientMatrix g = inst % 2 == 0 ? random_matrix(m, d, inst)
                                           : random_lattice_matrix(m, d, inst);
    auto index = ColumnOrderIndex::build(g);
    std::vector<char> alive(m, 1);
    // Half the instances also drop a few rows first, so the leave-one-out
    // path is exercised against a partially removed live set.
    if (inst % 2 == 1 && m > 6) {
      std::vector<std::uint32_t> gone = {1, static_cast<std::uint32_t>(m / 2),
                                         static_cast<std::uint32_t>(m - 1)};
      index.remove_rows(gone);
      for (auto id : gone) alive[id] = 0;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!alive[i]) continue;
      CHECK(loo_median(index, g, i) == naive_ewm(g, &alive, i));
    }
  }
}

TEST_CASE("geometric_median on degenerate and symmetric configurations") {
  const GradientMatrix single = from_rows({{4.5, -1}});
  const auto r1 = geometric_median(single);
  CHECK(r1.point == Vec{4.5, -1});

  const GradientMatrix square = from_rows({{1, 1}, {1, -1}, {-1, 1}, {-1, -1}});
  const auto r2 = geometric_median(square, 1e-12);
  CHECK(r2.converged);
  CHECK(std::abs(r2.point[0]) < 1e-10);
  CHECK(std::abs(r2.point[1]) < 1e-10);
}

TEST_CASE("geometric_median matches a zooming grid-search oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    rng::Philox rng(seed, 4);
    const std::size_t n = 5 + rng.below(8);
    GradientMatrix pts(n, 2);
    for (double& v : pts.values) v = rng.uniform();
    const auto res = geometric_median(pts, 1e-12, 500);
    const Vec oracle = grid_search_gm(pts);
    CHECK(l2_distance(res.point, oracle) < 1e-6);
    CHECK(gm_objective(pts, res.point) <= gm_objective(pts, oracle) + 1e-9);
  }
}

TEST_CASE("geometric_median objective trace never increases") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GradientMatrix pts = random_matrix(25, 3, 100 + seed);
    const auto res = geometric_median(pts);
    REQUIRE(!res.objective_trace.empty());
    for (std::size_t t = 1; t < res.objective_trace.size(); ++t)
      CHECK(res.objective_trace[t] <= res.objective_trace[t - 1] + 1e-12);
  }
}

TEST_CASE("geometric_median survives an iterate landing on a data point") {
  // The centroid (the starting iterate) coincides with the middle point, so
  // the safeguard nudge has to fire immediately.
  const GradientMatrix pts =
      from_rows({{0, 0}, {2, 0}, {1, 0}, {1, 2}, {1, -2}});
  const auto res = geometric_median(pts, 1e-10, 500);
  for (double v : res.point) CHECK(std::isfinite(v));
  CHECK(gm_objective(pts, res.point) <= gm_objective(pts, {1, 0}) + 1e-6);
  CHECK(l2_distance(res.point, Vec{1, 0}) < 1e-4);
}

TEST_CASE("geometric_median rejects bad inputs") {
  CHECK_THROWS_AS(geometric_median(GradientMatrix{}), std::invalid_argument);
  CHECK_THROWS_WITH_AS(geometric_median(random_matrix(3, 2, 0), 0.0),
                       "tol must be positive", std::invalid_argument);
}

TEST_CASE("l2 distance utilities") {
  const Vec a = {1, 2, 3};
  CHECK(l2_distance(a, a) == 0.0);
  CHECK(l2_distance(Vec{0, 0}, Vec{3, 4}) == 5.0);
  CHECK(l2_distance(Vec{1}, Vec{-1}) == 2.0);
  CHECK(l2_norm(Vec{3, 4}) == 5.0);
  CHECK_THROWS_WITH_AS(l2_distance(Vec{1}, Vec{1, 2}), "l2_distance: length mismatch",
                       std::invalid_argument);
}

TEST_CASE("rank statistics helpers") {
  const Vec x = {1, 2, 3, 4, 5};
  const Vec y = {2, 4, 6, 8, 10};
  CHECK(spearman(x, y) == doctest::Approx(1.0));
  const Vec rev = {10, 8, 6, 4, 2};
  CHECK(spearman(x, rev) == doctest::Approx(-1.0));
  const auto ranks = average_ranks(Vec{3, 1, 3, 2});
  CHECK(ranks == std::vector<double>{3.5, 1.0, 3.5, 2.0});
  CHECK_THROWS_AS(spearman(Vec{1, 1, 1}, Vec{1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(kurtosis(Vec{2, 2, 2}), std::invalid_argument);
  CHECK(mean_of(Vec{1, 2, 3}) == 2.0);
  CHECK(sample_variance(Vec{1, 2, 3, 4, 5}) == doctest::Approx(2.5));
}

TEST_CASE("Philox streams are deterministic and distinct") {
  rng::Philox a(123, 7), b(123, 7), c(123, 8);
  bool all_equal = true, any_diff_stream = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u32();
    all_equal &= (va == b.next_u32());
    any_diff_stream |= (va != c.next_u32());
  }
  CHECK(all_equal);
  CHECK(any_diff_stream);

  rng::Philox u(5, 0);
  double mean = 0.0, var = 0.0;
  const int n = 20000;
  std::vector<double> zs(n);
  for (double& z : zs) z = u.normal();
  for (double z : zs) mean += z;
  mean /= n;
  for (double z : zs) var += (z - mean) * (z - mean);
  var /= n - 1;
  CHECK(std::abs(mean) < 0.05);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("normal_quantile hits reference values") {
  CHECK(rng::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rng::normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
  CHECK(rng::normal_quantile(0.025) ==
        doctest::Approx(-rng::normal_quantile(0.975)).epsilon(1e-9));
  CHECK_THROWS_AS(rng::normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(rng::normal_quantile(1.0), std::invalid_argument);
}
