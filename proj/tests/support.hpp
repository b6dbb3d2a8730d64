#pragma once
// Shared helpers for the test suite: independent oracles (naive medians, a
// full-recompute greedy filter, pairwise AUROC, threshold scans), random
// instance builders on the library PRNG, and subprocess plumbing for CLI
// checks. Oracles deliberately avoid the library's fast paths so agreement is
// evidence, not tautology.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "medix/matrix.hpp"
#include "medix/rng.hpp"

namespace testsupport {

using medix::GradientMatrix;
using medix::Matrix;
using medix::Vec;

// ---- naive medians (re-sort every time) ----

inline double naive_column_median(const GradientMatrix& g, std::size_t j,
                                  const std::vector<char>* alive = nullptr,
                                  std::size_t skip = SIZE_MAX) {
  std::vector<double> col;
  col.reserve(g.rows);
  for (std::size_t i = 0; i < g.rows; ++i) {
    if (alive && !(*alive)[i]) continue;
    if (i == skip) continue;
    col.push_back(g(i, j));
  }
  std::sort(col.begin(), col.end());
  const std::size_t s = col.size();
  return s % 2 == 1 ? col[s / 2] : (col[s / 2 - 1] + col[s / 2]) / 2;
}

inline Vec naive_ewm(const GradientMatrix& g, const std::vector<char>* alive = nullptr,
                     std::size_t skip = SIZE_MAX) {
  Vec out(g.cols);
  for (std::size_t j = 0; j < g.cols; ++j)
    out[j] = naive_column_median(g, j, alive, skip);
  return out;
}

inline double naive_distance(const Vec& a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

// ---- full-recompute greedy filter oracle ----
// Mirrors the documented loop: compute d_t and all leave-one-out deltas, stop
// when the best delta fails to exceed eps_stop, otherwise remove the top-k
// (delta descending, id ascending), capped by T iterations and by survivor
// exhaustion. Every median comes from naive_ewm.

struct OracleTraceRow {
  std::size_t iter;
  double d_t;
  double delta_max;
  std::vector<std::uint32_t> removed;
};

struct OracleResult {
  std::vector<std::uint32_t> outlier_ids;   // ascending
  std::vector<std::uint32_t> survivor_ids;  // ascending
  std::vector<OracleTraceRow> trace;
  std::string stop_reason;
};

inline OracleResult naive_filter(const GradientMatrix& g, std::span<const double> ref,
                                 double eps_stop, std::size_t k, std::size_t T) {
  OracleResult res;
  std::vector<char> alive(g.rows, 1);
  std::size_t live = g.rows;
  std::size_t t = 0;
  while (true) {
    const double d_t = naive_distance(naive_ewm(g, &alive), ref);
    std::vector<std::pair<double, std::uint32_t>> deltas;
    deltas.reserve(live);
    for (std::size_t i = 0; i < g.rows; ++i) {
      if (!alive[i]) continue;
      deltas.emplace_back(d_t - naive_distance(naive_ewm(g, &alive, i), ref),
                          static_cast<std::uint32_t>(i));
    }
    double delta_max = deltas[0].first;
    for (const auto& [dv, id] : deltas) delta_max = std::max(delta_max, dv);

    if (!(delta_max > eps_stop)) {
      res.trace.push_back({t, d_t, delta_max, {}});
      res.stop_reason = "converged";
      break;
    }
    std::stable_sort(deltas.begin(), deltas.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<std::uint32_t> removed;
    for (std::size_t q = 0; q < k; ++q) {
      removed.push_back(deltas[q].second);
      alive[deltas[q].second] = 0;
    }
    live -= k;
    res.trace.push_back({t, d_t, delta_max, removed});
    res.outlier_ids.insert(res.outlier_ids.end(), removed.begin(), removed.end());
    ++t;
    if (t >= T) {
      res.stop_reason = "max_iter";
      break;
    }
    if (live <= k) {
      res.stop_reason = "exhausted";
      break;
    }
  }
  for (std::size_t i = 0; i < g.rows; ++i)
    if (alive[i]) res.survivor_ids.push_back(static_cast<std::uint32_t>(i));
  std::sort(res.outlier_ids.begin(), res.outlier_ids.end());
  return res;
}

// ---- detection metric oracles ----

// O(n^2) pairwise Mann-Whitney statistic.
inline double pairwise_auroc(const std::vector<double>& in, const std::vector<double>& out) {
  double num = 0.0;
  for (double a : in)
    for (double b : out) num += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  return num / (static_cast<double>(in.size()) * static_cast<double>(out.size()));
}

// Exhaustive scan over every pooled candidate threshold: largest cutoff whose
// inclusive >= InD rate still meets the target, then the OOD rate at it.
inline double scan_fpr_at_tpr(const std::vector<double>& in, const std::vector<double>& out,
                              double target) {
  std::vector<double> cand = in;
  cand.insert(cand.end(), out.begin(), out.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  double best = cand.front();
  bool found = false;
  for (double thr : cand) {
    std::size_t above = 0;
    for (double s : in) above += (s >= thr);
    if (static_cast<double>(above) / static_cast<double>(in.size()) >= target) {
      best = thr;
      found = true;
    }
  }
  if (!found) best = cand.front();
  std::size_t fp = 0;
  for (double s : out) fp += (s >= best);
  return static_cast<double>(fp) / static_cast<double>(out.size());
}

// ---- random instance builders ----

// Continuous entries in [-1, 1).
inline GradientMatrix random_matrix(std::size_t m, std::size_t d, std::uint64_t seed) {
  medix::rng::Philox rng(seed, 0x6d6174ULL);
  GradientMatrix g(m, d);
  for (double& v : g.values) v = 2.0 * rng.uniform() - 1.0;
  return g;
}

// Entries on a small integer lattice, forcing duplicate order statistics.
inline GradientMatrix random_lattice_matrix(std::size_t m, std::size_t d,
                                            std::uint64_t seed, std::uint64_t levels = 5) {
  medix::rng::Philox rng(seed, 0x6c6174ULL);
  GradientMatrix g(m, d);
  for (double& v : g.values) v = static_cast<double>(rng.below(levels));
  return g;
}

// ---- filesystem / subprocess plumbing ----

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("medix_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline const char* cli_path() { return std::getenv("MEDIX_CLI"); }

// Runs the medix binary with the given arguments; returns the exit code.
// Output is captured into log_path when given, otherwise discarded.
inline int run_cli(const std::string& args, const std::string& log_path = "") {
  const char* bin = cli_path();
  if (!bin) return -1;
  std::string cmd = std::string(bin) + " " + args + " >" +
                    (log_path.empty() ? std::string("/dev/null") : log_path) + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

}  // namespace testsupport
