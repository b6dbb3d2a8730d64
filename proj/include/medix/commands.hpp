#pragma once
// Subcommand pipelines behind the CLI front end. Each cmd_* validates its
// options (ConfigError), then runs named stages whose failures surface as
// StageError, so the binary can map them to exit codes 2 and 3.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "medix/bounds.hpp"

namespace medix {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& detail)
      : std::runtime_error(stage + ": " + detail), stage_name(stage) {}
  std::string stage_name;
};

struct Synth2dOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  unsigned threads = 1;
  double pi = 0.5;
  std::size_t n_per_class = 200;
  double conf_threshold = 0.0;  // 0 disables the confidence prefilter
  // Leave-one-out deltas on this toy live at the inter-order-statistic gap
  // scale (~1e-6 at one epoch), far below the generic filter default; T * k
  // budgets removals at 1.1x the expected OOD count of the default world.
  double eps_stop = 1e-8;
  std::size_t k = 0;  // 0 = default_k(wild size)
  std::size_t T = 11;
  // One epoch keeps the far cluster unsaturated: longer training drives its
  // pseudo-label confidences to 1 and its gradients to zero, erasing the
  // signal the filter needs.
  double lr = 0.1;
  std::size_t epochs = 1;
  std::size_t batch = 64;
  double det_lr = 0.1;
  std::size_t det_epochs = 200;
  double ind_loss_weight = 10.0;
};

// Full pipeline on the 2-D Gaussian world: generate, train f, reference
// gradient, pseudo-label + wild gradients, filter, train g on flagged rows,
// evaluate on held-out draws. Writes train/wild/ref/model/filter/trace/
// scores/metrics artifacts plus the two scatter plots.
void cmd_synth2d(const Synth2dOptions& opt);

struct SweepOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::size_t d = 20;
  double sigma = 1.0;
  double Delta = 10.0;
  std::size_t ind_rows = 300;
  std::size_t n_steps = 10;
  std::size_t step = 30;
};

// Deviation vs injected-OOD-count sweep on simulated gradients; emits
// sweep.csv, the Spearman statistic, and a line plot.
void cmd_sweep(const SweepOptions& opt);

struct BoundsCmdOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  unsigned threads = 1;
  BoundInputs inputs;
  std::string kind = "inlier";  // coverage target
  std::size_t coverage_trials = 0;  // 0 = closed-form table only
  std::string tail = "gaussian";
  unsigned nu = 8;
  double eps_stop = 0.0;  // 0 = coverage_policy value
  std::size_t k = 0;
  std::size_t T = 0;
};

// Prints the bound table (all forms) and writes bounds.csv; with
// --coverage N also runs Monte-Carlo verification and writes coverage.csv.
void cmd_bounds(const BoundsCmdOptions& opt);

struct EwmVsGmOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  unsigned threads = 1;
  std::size_t m = 120;
  std::size_t d = 32;
  double sigma = 1.0;
  double Delta = 6.0;
  std::vector<double> pis = {0.1, 0.2, 0.3, 0.4, 0.5};
  // eps_stop sits between the two aggregators' delta scales at the 50/50
  // straddle (EWM ~ 4-7, GM ~ 1.5 on this world), where the element-wise
  // median's jump dwarfs the geometric median's smooth shift. Below 0.5 both
  // stall, so the removal curves never cross.
  double eps_stop = 2.0;
  std::size_t k = 0;  // 0 = default_k(m)
  std::size_t T = 0;  // 0 = per-level removal budget 1.15 * pi * m
};

// Runs the filter with both aggregators per contamination level; emits
// ewm_vs_gm.csv (deviations + true-OOD removal proportions) and a line plot.
void cmd_ewm_vs_gm(const EwmVsGmOptions& opt);

struct HyperSweepOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  unsigned threads = 1;
  double pi = 0.5;
  std::size_t n_per_class = 200;
  // Decade steps around the synth2d default tolerance, mirroring the x10 /
  // x0.5 perturbations of the reference sensitivity study.
  std::vector<double> eps_grid = {1e-10, 1e-9, 1e-8, 1e-7};
  std::vector<std::size_t> k_grid = {15, 30, 60, 120};
  std::size_t T = 11;
  double lr = 0.1;
  std::size_t epochs = 1;
  std::size_t batch = 64;
  double det_lr = 0.1;
  std::size_t det_epochs = 200;
  double ind_loss_weight = 10.0;
};

// Shares one world/classifier across the (eps_stop, k) grid and reruns
// filter + detector + held-out metrics per cell; emits hyper_sweep.csv.
void cmd_hyper_sweep(const HyperSweepOptions& opt);

struct FilterCmdOptions {
  std::string out_dir = ".";
  unsigned threads = 1;
  std::string gradients_path;
  std::string ref_path;
  double eps_stop = 5e-3;
  std::size_t k = 0;  // 0 = default_k(m)
  std::size_t T = 40;
  std::string agg = "ewm";  // or "gm"
};

// Filters a raw gradient file against a reference-gradient file; writes
// filter.json + trace.csv.
void cmd_filter(const FilterCmdOptions& opt);

struct MetricsCmdOptions {
  std::string out_dir = ".";
  std::string scores_in_path;
  std::string scores_out_path;
  double tpr_target = 0.95;
  std::string filter_json;  // optional: adds err_in/err_out
  std::string wild_csv;     // required with filter_json
};

// Detection metrics from score files (plus optional filter/wild artifacts for
// the error rates); prints the table and writes metrics.csv.
void cmd_metrics(const MetricsCmdOptions& opt);

}  // namespace medix
