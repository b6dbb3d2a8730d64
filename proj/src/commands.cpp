#include "medix/commands.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "medix/classifier.hpp"
#include "medix/detector.hpp"
#include "medix/io.hpp"
#include "medix/median.hpp"
#include "medix/stats.hpp"
#include "medix/svg.hpp"

namespace medix {

namespace {

template <class F>
auto run_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir);
}

std::string out_path(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void require_input_file(const std::string& path, const char* flag) {
  if (path.empty()) throw ConfigError(std::string(flag) + " is required");
  if (!std::filesystem::exists(path))
    throw ConfigError("input file not found: " + path);
}

Matrix take_rows(const Matrix& src, const std::vector<std::uint32_t>& ids) {
  Matrix out(ids.size(), src.cols);
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy(src.row(ids[i]).begin(), src.row(ids[i]).end(), out.row(i).begin());
  return out;
}

WildSet select_origin(const WildSet& wild, Origin keep) {
  std::vector<std::uint32_t> ids;
  for (std::size_t i = 0; i < wild.origin.size(); ++i)
    if (wild.origin[i] == keep) ids.push_back(static_cast<std::uint32_t>(i));
  WildSet out;
  out.features = take_rows(wild.features, ids);
  out.origin.assign(ids.size(), keep);
  if (!wild.pseudo_labels.empty()) {
    out.pseudo_labels.reserve(ids.size());
    for (std::uint32_t id : ids) out.pseudo_labels.push_back(wild.pseudo_labels[id]);
  }
  if (!wild.gradients.empty()) out.gradients = take_rows(wild.gradients, ids);
  return out;
}

Vec flatten_reference(const Matrix& m) {
  if (m.rows == 1 || m.cols == 1) return m.values;
  throw std::invalid_argument("reference must be a single row or column");
}

void print_kv(const char* key, const std::string& value) {
  std::cout << key;
  for (std::size_t i = std::string(key).size(); i < 10; ++i) std::cout << ' ';
  std::cout << "= " << value << '\n';
}

void print_kv(const char* key, double value) { print_kv(key, format_double(value)); }

// Scatter of the wild set colored by origin, re-read from its CSV.
void plot_wild_truth(const std::string& wild_csv, const std::string& svg_path) {
  const WildSet wild = read_wild_csv(wild_csv);
  SvgSeries ind{"InD", "#4878cf", {}, false, 3.0};
  SvgSeries ood{"OOD", "#ee854a", {}, false, 3.0};
  for (std::size_t i = 0; i < wild.size(); ++i) {
    const auto x = wild.features.row(i);
    (wild.origin[i] == Origin::ind ? ind : ood)
        .points.emplace_back(x[0], x.size() > 1 ? x[1] : 0.0);
  }
  write_svg_plot(svg_path, "wild set, ground truth", "x0", "x1", {ind, ood});
}

// Scatter of the wild set with filter-flagged rows in black, re-read from the
// CSV + JSON artifacts.
void plot_wild_flagged(const std::string& wild_csv, const std::string& filter_json,
                       const std::string& svg_path) {
  const WildSet wild = read_wild_csv(wild_csv);
  const FilterResult fr = read_filter_json(filter_json);
  std::vector<char> flagged(wild.size(), 0);
  for (std::uint32_t id : fr.outlier_ids) flagged[id] = 1;
  SvgSeries kept{"survivor", "#b5b5b5", {}, false, 3.0};
  SvgSeries out{"flagged", "#000000", {}, false, 3.0};
  for (std::size_t i = 0; i < wild.size(); ++i) {
    const auto x = wild.features.row(i);
    (flagged[i] ? out : kept).points.emplace_back(x[0], x.size() > 1 ? x[1] : 0.0);
  }
  write_svg_plot(svg_path, "wild set, flagged outliers", "x0", "x1", {kept, out});
}

struct HeldOutEval {
  double fpr95 = 0.0;
  double auroc = 0.0;
  double tpr = 0.0;
  double ind_acc = 0.0;
  Vec scores_in;
  Vec scores_out;
};

// Scores fresh draws from the same mixture on the detector; the eval world's
// seed is the bitwise complement of the run seed so it never collides with
// the training draws of nearby seeds.
HeldOutEval held_out_eval(const MixtureSpec& spec, const IndModel& model,
                          const OodDetector& det, double tpr_target) {
  MixtureSpec eval_spec = spec;
  eval_spec.seed = ~spec.seed;
  const GaussianWorld eval_world = gaussian_world(eval_spec);
  const WildSet eval_in = select_origin(eval_world.wild, Origin::ind);
  const WildSet eval_out = select_origin(eval_world.wild, Origin::ood);

  HeldOutEval ev;
  ev.scores_in = score_all(det, eval_in.features);
  ev.scores_out = score_all(det, eval_out.features);
  const double thr = threshold_at_tpr(ev.scores_in, tpr_target);
  std::size_t above = 0;
  for (double s : ev.scores_in) above += (s >= thr);
  ev.tpr = static_cast<double>(above) / static_cast<double>(ev.scores_in.size());
  ev.fpr95 = fpr_at_tpr(ev.scores_in, ev.scores_out, tpr_target);
  ev.auroc = auroc(ev.scores_in, ev.scores_out);
  ev.ind_acc = ind_accuracy(model, eval_world.train);
  return ev;
}

}  // namespace

void cmd_synth2d(const Synth2dOptions& opt) {
  if (!(opt.pi > 0.0 && opt.pi <= 1.0)) throw ConfigError("pi outside (0,1]");
  if (opt.n_per_class < 1) throw ConfigError("n_per_class must be >= 1");
  if (opt.eps_stop <= 0.0) throw ConfigError("eps_stop must be positive");
  if (opt.T < 1) throw ConfigError("T must be >= 1");
  if (!(opt.conf_threshold >= 0.0 && opt.conf_threshold <= 1.0))
    throw ConfigError("conf_threshold outside [0,1]");
  ensure_out_dir(opt.out_dir);

  MixtureSpec spec = default_mixture_spec(opt.seed);
  spec.n_per_class = opt.n_per_class;
  const double ind_total = 3.0 * static_cast<double>(opt.n_per_class);
  spec.n_ood = opt.pi < 1.0 ? static_cast<std::size_t>(
                                  std::llround(opt.pi / (1.0 - opt.pi) * ind_total))
                            : 3 * opt.n_per_class;
  if (spec.n_ood < 1) throw ConfigError("pi too small for this world size");

  GaussianWorld world = run_stage("world", [&] {
    GaussianWorld w = gaussian_world(spec);
    if (opt.pi >= 1.0) {
      const WildSet ind_pool = select_origin(w.wild, Origin::ind);
      const WildSet ood_pool = select_origin(w.wild, Origin::ood);
      w.wild = make_wild(ind_pool, ood_pool, 1.0, ood_pool.size(), opt.seed);
    }
    return w;
  });
  write_dataset_csv(world.train, out_path(opt.out_dir, "train.csv"));

  const IndModel model = run_stage("train", [&] {
    TrainConfig tc;
    tc.lr = opt.lr;
    tc.epochs = opt.epochs;
    tc.batch = opt.batch;
    tc.seed = opt.seed;
    return train_ind_classifier(world.train, tc);
  });
  save_model_csv(model, out_path(opt.out_dir, "model.csv"));

  WildSet wild = std::move(world.wild);
  const Vec ref = run_stage("gradients", [&] {
    assign_pseudo_labels(model, wild);
    if (opt.conf_threshold > 0.0) {
      PrefilterResult pre = confidence_prefilter(model, wild, opt.conf_threshold);
      print_kv("prefilter", pre.removed_fraction);
      wild = std::move(pre.kept);
    }
    wild.gradients = wild_gradients(model, wild);
    return reference_gradient(model, world.train);
  });
  {
    Matrix ref_row(1, ref.size());
    ref_row.values = ref;
    write_matrix_csv(ref_row, out_path(opt.out_dir, "ref_grad.csv"));
  }
  write_wild_csv(wild, out_path(opt.out_dir, "wild.csv"));
  write_matrix_csv(wild.gradients, out_path(opt.out_dir, "wild_gradients.csv"));

  FilterConfig fc;
  fc.eps_stop = opt.eps_stop;
  fc.k = opt.k != 0 ? opt.k : default_k(wild.size());
  fc.T = opt.T;
  const FilterResult fr = run_stage("filter", [&] {
    return medix_filter(wild, ref, fc, Aggregator::element_wise_median, opt.threads);
  });
  write_filter_json(fr, out_path(opt.out_dir, "filter.json"));
  write_trace_csv(fr, out_path(opt.out_dir, "trace.csv"));
  const ErrRates rates = err_rates(fr, wild);

  const OodDetector det = run_stage("detector", [&] {
    DetectorConfig dc;
    dc.lr = opt.det_lr;
    dc.epochs = opt.det_epochs;
    dc.ind_loss_weight = opt.ind_loss_weight;
    dc.seed = opt.seed;
    return train_ood_detector(world.train.features, take_rows(wild.features, fr.outlier_ids),
                              dc);
  });

  const HeldOutEval ev =
      run_stage("metrics", [&] { return held_out_eval(spec, model, det, 0.95); });
  write_scores(ev.scores_in, out_path(opt.out_dir, "scores_in.csv"));
  write_scores(ev.scores_out, out_path(opt.out_dir, "scores_out.csv"));

  DetectionMetrics metrics;
  metrics.fpr95 = ev.fpr95;
  metrics.auroc = ev.auroc;
  metrics.tpr = ev.tpr;
  metrics.ind_acc = ev.ind_acc;
  metrics.err_in = rates.err_in.value_or(0.0);
  metrics.err_out = rates.err_out.value_or(0.0);
  write_metrics_csv(metrics, out_path(opt.out_dir, "metrics.csv"));

  run_stage("plot", [&] {
    plot_wild_truth(out_path(opt.out_dir, "wild.csv"),
                    out_path(opt.out_dir, "scatter_truth.svg"));
    plot_wild_flagged(out_path(opt.out_dir, "wild.csv"), out_path(opt.out_dir, "filter.json"),
                      out_path(opt.out_dir, "scatter_flagged.svg"));
  });

  print_kv("stop", stop_reason_name(fr.stop_reason));
  print_kv("iters", static_cast<double>(fr.trace.size()));
  print_kv("flagged", static_cast<double>(fr.outlier_ids.size()));
  print_kv("err_in", metrics.err_in);
  print_kv("err_out", metrics.err_out);
  print_kv("fpr95", metrics.fpr95);
  print_kv("auroc", metrics.auroc);
  print_kv("tpr", metrics.tpr);
  print_kv("ind_acc", metrics.ind_acc);
}

void cmd_sweep(const SweepOptions& opt) {
  if (opt.d < 1) throw ConfigError("d must be >= 1");
  if (opt.sigma <= 0.0) throw ConfigError("sigma must be positive");
  if (opt.Delta < 0.0) throw ConfigError("Delta must be non-negative");
  if (opt.ind_rows < 1) throw ConfigError("ind_rows must be >= 1");
  if (opt.n_steps < 2) throw ConfigError("n_steps must be >= 2");
  if (opt.step < 1) throw ConfigError("step must be >= 1");
  ensure_out_dir(opt.out_dir);

  const std::size_t needed = std::max(opt.ind_rows, (opt.n_steps - 1) * opt.step);
  const Vec mu_in(opt.d, 0.0);
  const GradientWorld world = run_stage("world", [&] {
    return simulate_gradient_world(mu_in, opt.sigma, opt.Delta, 0.5, 2 * needed, opt.d,
                                   Tail::gaussian, 8, opt.seed);
  });

  const std::vector<DeviationPoint> points = run_stage("sweep", [&] {
    WildSet ind_pool, ood_pool;
    ind_pool.gradients = Matrix(opt.ind_rows, opt.d);
    ood_pool.gradients = Matrix(needed, opt.d);
    std::size_t at_in = 0, at_out = 0;
    for (std::size_t i = 0; i < world.gradients.rows; ++i) {
      if (world.origin[i] == Origin::ind) {
        if (at_in < opt.ind_rows)
          std::copy(world.gradients.row(i).begin(), world.gradients.row(i).end(),
                    ind_pool.gradients.row(at_in++).begin());
      } else if (at_out < needed) {
        std::copy(world.gradients.row(i).begin(), world.gradients.row(i).end(),
                  ood_pool.gradients.row(at_out++).begin());
      }
    }
    std::vector<std::size_t> steps(opt.n_steps);
    for (std::size_t t = 0; t < opt.n_steps; ++t) steps[t] = t * opt.step;
    return deviation_sweep(ind_pool, ood_pool, mu_in, steps);
  });

  {
    std::ofstream f(out_path(opt.out_dir, "sweep.csv"));
    if (!f) throw StageError("io", "cannot open sweep.csv");
    f << "n_ood,deviation\n";
    for (const DeviationPoint& p : points)
      f << p.n_ood << ',' << format_double(p.deviation) << '\n';
  }

  Vec xs, ys;
  for (const DeviationPoint& p : points) {
    xs.push_back(static_cast<double>(p.n_ood));
    ys.push_back(p.deviation);
  }
  const double rho = run_stage("stats", [&] { return spearman(xs, ys); });
  {
    std::ofstream f(out_path(opt.out_dir, "sweep_stats.csv"));
    if (!f) throw StageError("io", "cannot open sweep_stats.csv");
    f << "spearman\n" << format_double(rho) << '\n';
  }
  print_kv("spearman", rho);

  run_stage("plot", [&] {
    const auto rows = read_csv_rows(out_path(opt.out_dir, "sweep.csv"));
    SvgSeries dev{"deviation", "#4878cf", {}, true, 3.0};
    for (std::size_t r = 1; r < rows.size(); ++r)
      dev.points.emplace_back(std::stod(rows[r][0]), std::stod(rows[r][1]));
    write_svg_plot(out_path(opt.out_dir, "sweep.svg"), "deviation vs injected OOD count",
                   "n_ood", "deviation", {dev});
  });
}

void cmd_bounds(const BoundsCmdOptions& opt) {
  BoundKind kind;
  try {
    kind = parse_bound_kind(opt.kind);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  Tail tail;
  if (opt.tail == "gaussian") tail = Tail::gaussian;
  else if (opt.tail == "student_t") tail = Tail::student_t;
  else throw ConfigError("unknown tail: " + opt.tail);
  if (opt.inputs.m < 2 || opt.inputs.d < 1) throw ConfigError("m and d are required");
  ensure_out_dir(opt.out_dir);

  struct Row {
    std::string kind;
    double contamination = 0.0;
    BoundValue bv;
    std::string error;
  };
  std::vector<Row> rows;
  const double in_contam = opt.inputs.pi / (2.0 * (1.0 - opt.inputs.pi));
  const double out_contam = (1.0 - opt.inputs.pi) / (2.0 * opt.inputs.pi);
  const auto add = [&](const std::string& name, double contam, auto&& eval) {
    Row r;
    r.kind = name;
    r.contamination = contam;
    try {
      r.bv = eval();
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    rows.push_back(std::move(r));
  };
  add("inlier", in_contam, [&] { return inlier_bound(opt.inputs); });
  add("inlier-proof-form", in_contam, [&] { return inlier_bound_proof_form(opt.inputs); });
  add("inlier-heavy-tail", in_contam, [&] { return inlier_bound_heavy_tail(opt.inputs); });
  add("outlier", out_contam, [&] { return outlier_bound(opt.inputs); });

  std::cout << "kind,contamination,value,vacuous\n";
  std::ofstream csv(out_path(opt.out_dir, "bounds.csv"));
  if (!csv) throw StageError("io", "cannot open bounds.csv");
  csv << "kind,contamination,value,vacuous\n";
  for (const Row& r : rows) {
    if (r.error.empty()) {
      const std::string line = r.kind + ',' + format_double(r.contamination) + ',' +
                               format_double(r.bv.value) + ',' + (r.bv.vacuous ? "1" : "0");
      std::cout << line << '\n';
      csv << line << '\n';
    } else {
      std::cout << r.kind << ',' << format_double(r.contamination) << ",error: " << r.error
                << ",\n";
    }
  }

  if (opt.coverage_trials == 0) return;
  CoverageScenario scn;
  scn.sigma = opt.inputs.sigma;
  scn.tail = tail;
  scn.nu = opt.nu;
  scn.pi = opt.inputs.pi;
  scn.m = opt.inputs.m;
  scn.d = opt.inputs.d;
  scn.Delta = opt.inputs.Delta;
  scn.delta = opt.inputs.delta;
  scn.eps_dev = opt.inputs.eps_dev;
  scn.policy = coverage_policy(scn);
  if (opt.eps_stop > 0.0) scn.policy.eps_stop = opt.eps_stop;
  if (opt.k != 0) scn.policy.k = opt.k;
  if (opt.T != 0) scn.policy.T = opt.T;

  const CoverageResult res = run_stage("coverage", [&] {
    return monte_carlo_coverage(scn, kind, opt.coverage_trials, opt.seed, opt.threads);
  });
  write_coverage_csv(res.records, out_path(opt.out_dir, "coverage.csv"));
  print_kv("coverage", res.coverage);
  print_kv("bound", res.bound.value);
  print_kv("vacuous", res.bound.vacuous ? 1.0 : 0.0);
}

void cmd_ewm_vs_gm(const EwmVsGmOptions& opt) {
  if (opt.m < 4) throw ConfigError("m must be >= 4");
  if (opt.d < 1) throw ConfigError("d must be >= 1");
  if (opt.sigma <= 0.0) throw ConfigError("sigma must be positive");
  if (opt.Delta <= 0.0) throw ConfigError("Delta must be positive");
  if (opt.pis.empty()) throw ConfigError("empty pi grid");
  for (double pi : opt.pis)
    if (!(pi > 0.0 && pi < 1.0)) throw ConfigError("pi outside (0,1)");
  if (opt.eps_stop <= 0.0) throw ConfigError("eps_stop must be positive");
  ensure_out_dir(opt.out_dir);

  const Vec mu_in(opt.d, 0.0);

  std::ofstream csv(out_path(opt.out_dir, "ewm_vs_gm.csv"));
  if (!csv) throw StageError("io", "cannot open ewm_vs_gm.csv");
  csv << "pi,ewm_deviation,gm_deviation,ewm_removal,gm_removal\n";
  for (std::size_t level = 0; level < opt.pis.size(); ++level) {
    const double pi = opt.pis[level];
    FilterConfig fc;
    fc.eps_stop = opt.eps_stop;
    fc.k = opt.k != 0 ? opt.k : default_k(opt.m);
    // T = 0 budgets both aggregators identically at 1.15 * pi * m removals,
    // so the curves compare greedy selection purity, not stopping luck.
    fc.T = opt.T != 0
               ? opt.T
               : (static_cast<std::size_t>(
                      std::ceil(1.15 * pi * static_cast<double>(opt.m))) +
                  fc.k - 1) /
                     fc.k;
    const GradientWorld world = run_stage("world", [&] {
      return simulate_gradient_world(mu_in, opt.sigma, opt.Delta, pi, opt.m, opt.d,
                                     Tail::gaussian, 8, opt.seed + level);
    });
    const auto removal_fraction = [&](Aggregator agg) {
      const FilterResult fr = medix_filter(world.gradients, mu_in, fc, agg, opt.threads);
      std::size_t m_out = 0, removed_out = 0;
      for (Origin o : world.origin) m_out += (o == Origin::ood);
      for (std::uint32_t id : fr.outlier_ids) removed_out += (world.origin[id] == Origin::ood);
      return static_cast<double>(removed_out) / static_cast<double>(m_out);
    };
    const double ewm_dev = l2_distance(element_wise_median(world.gradients), mu_in);
    const double gm_dev = run_stage("aggregate", [&] {
      return l2_distance(geometric_median(world.gradients).point, mu_in);
    });
    const double ewm_rm = run_stage("filter", [&] {
      return removal_fraction(Aggregator::element_wise_median);
    });
    const double gm_rm = run_stage("filter", [&] {
      return removal_fraction(Aggregator::geometric_median);
    });
    csv << format_double(pi) << ',' << format_double(ewm_dev) << ',' << format_double(gm_dev)
        << ',' << format_double(ewm_rm) << ',' << format_double(gm_rm) << '\n';
    std::cout << "pi=" << format_double(pi) << " ewm_removal=" << format_double(ewm_rm)
              << " gm_removal=" << format_double(gm_rm) << '\n';
  }
  csv.close();

  run_stage("plot", [&] {
    const auto rows = read_csv_rows(out_path(opt.out_dir, "ewm_vs_gm.csv"));
    SvgSeries ewm{"EWM removal", "#4878cf", {}, true, 3.0};
    SvgSeries gm{"GM removal", "#ee854a", {}, true, 3.0};
    for (std::size_t r = 1; r < rows.size(); ++r) {
      ewm.points.emplace_back(std::stod(rows[r][0]), std::stod(rows[r][3]));
      gm.points.emplace_back(std::stod(rows[r][0]), std::stod(rows[r][4]));
    }
    write_svg_plot(out_path(opt.out_dir, "ewm_vs_gm.svg"),
                   "true-OOD removal by aggregator", "pi", "removal proportion", {ewm, gm});
  });
}

void cmd_hyper_sweep(const HyperSweepOptions& opt) {
  if (!(opt.pi > 0.0 && opt.pi < 1.0)) throw ConfigError("pi outside (0,1)");
  if (opt.eps_grid.empty() || opt.k_grid.empty()) throw ConfigError("empty grid");
  for (double e : opt.eps_grid)
    if (!(e > 0.0)) throw ConfigError("invalid grid value");
  for (std::size_t k : opt.k_grid)
    if (k < 1) throw ConfigError("invalid grid value");
  ensure_out_dir(opt.out_dir);

  MixtureSpec spec = default_mixture_spec(opt.seed);
  spec.n_per_class = opt.n_per_class;
  spec.n_ood = static_cast<std::size_t>(std::llround(
      opt.pi / (1.0 - opt.pi) * 3.0 * static_cast<double>(opt.n_per_class)));
  if (spec.n_ood < 1) throw ConfigError("pi too small for this world size");

  GaussianWorld world = run_stage("world", [&] { return gaussian_world(spec); });
  const IndModel model = run_stage("train", [&] {
    TrainConfig tc;
    tc.lr = opt.lr;
    tc.epochs = opt.epochs;
    tc.batch = opt.batch;
    tc.seed = opt.seed;
    return train_ind_classifier(world.train, tc);
  });
  WildSet wild = std::move(world.wild);
  const Vec ref = run_stage("gradients", [&] {
    assign_pseudo_labels(model, wild);
    wild.gradients = wild_gradients(model, wild);
    return reference_gradient(model, world.train);
  });

  std::ofstream csv(out_path(opt.out_dir, "hyper_sweep.csv"));
  if (!csv) throw StageError("io", "cannot open hyper_sweep.csv");
  csv << "eps_stop,k,err_in,err_out,fpr95,auroc\n";
  for (double eps : opt.eps_grid) {
    for (std::size_t k : opt.k_grid) {
      FilterConfig fc;
      fc.eps_stop = eps;
      fc.k = k;
      fc.T = opt.T;
      const FilterResult fr = run_stage("filter", [&] {
        return medix_filter(wild, ref, fc, Aggregator::element_wise_median, opt.threads);
      });
      const ErrRates rates = err_rates(fr, wild);
      const OodDetector det = run_stage("detector", [&] {
        DetectorConfig dc;
        dc.lr = opt.det_lr;
        dc.epochs = opt.det_epochs;
        dc.ind_loss_weight = opt.ind_loss_weight;
        dc.seed = opt.seed;
        return train_ood_detector(world.train.features,
                                  take_rows(wild.features, fr.outlier_ids), dc);
      });
      const HeldOutEval ev =
          run_stage("metrics", [&] { return held_out_eval(spec, model, det, 0.95); });
      csv << format_double(eps) << ',' << k << ',' << format_double(rates.err_in.value_or(0.0))
          << ',' << format_double(rates.err_out.value_or(0.0)) << ','
          << format_double(ev.fpr95) << ',' << format_double(ev.auroc) << '\n';
      std::cout << "eps_stop=" << format_double(eps) << " k=" << k
                << " fpr95=" << format_double(ev.fpr95) << '\n';
    }
  }
}

void cmd_filter(const FilterCmdOptions& opt) {
  require_input_file(opt.gradients_path, "--gradients");
  require_input_file(opt.ref_path, "--ref");
  if (opt.eps_stop <= 0.0) throw ConfigError("eps_stop must be positive");
  Aggregator agg;
  if (opt.agg == "ewm") agg = Aggregator::element_wise_median;
  else if (opt.agg == "gm") agg = Aggregator::geometric_median;
  else throw ConfigError("unknown aggregator: " + opt.agg);
  ensure_out_dir(opt.out_dir);

  const Matrix g = run_stage("io", [&] { return read_matrix_any(opt.gradients_path); });
  const Vec ref = run_stage("io", [&] { return flatten_reference(read_matrix_any(opt.ref_path)); });

  FilterConfig fc;
  fc.eps_stop = opt.eps_stop;
  fc.k = opt.k != 0 ? opt.k : default_k(g.rows);
  fc.T = opt.T;
  const FilterResult fr =
      run_stage("filter", [&] { return medix_filter(g, ref, fc, agg, opt.threads); });
  write_filter_json(fr, out_path(opt.out_dir, "filter.json"));
  write_trace_csv(fr, out_path(opt.out_dir, "trace.csv"));
  print_kv("flagged", static_cast<double>(fr.outlier_ids.size()));
  print_kv("survivors", static_cast<double>(fr.survivor_ids.size()));
  print_kv("stop", stop_reason_name(fr.stop_reason));
  print_kv("iters", static_cast<double>(fr.trace.size()));
}

void cmd_metrics(const MetricsCmdOptions& opt) {
  require_input_file(opt.scores_in_path, "--scores-in");
  require_input_file(opt.scores_out_path, "--scores-out");
  if (!(opt.tpr_target > 0.0 && opt.tpr_target <= 1.0))
    throw ConfigError("tpr_target outside (0,1]");
  if (!opt.filter_json.empty() && opt.wild_csv.empty())
    throw ConfigError("--wild is required with --filter-json");
  ensure_out_dir(opt.out_dir);

  const Vec sin = run_stage("io", [&] { return read_scores(opt.scores_in_path); });
  const Vec sout = run_stage("io", [&] { return read_scores(opt.scores_out_path); });

  DetectionMetrics m;
  run_stage("metrics", [&] {
    const double thr = threshold_at_tpr(sin, opt.tpr_target);
    std::size_t above = 0;
    for (double s : sin) above += (s >= thr);
    m.tpr = static_cast<double>(above) / static_cast<double>(sin.size());
    m.fpr95 = fpr_at_tpr(sin, sout, opt.tpr_target);
    m.auroc = auroc(sin, sout);
  });
  if (!opt.filter_json.empty()) {
    require_input_file(opt.filter_json, "--filter-json");
    require_input_file(opt.wild_csv, "--wild");
    run_stage("io", [&] {
      const FilterResult fr = read_filter_json(opt.filter_json);
      const WildSet wild = read_wild_csv(opt.wild_csv);
      const ErrRates rates = err_rates(fr, wild);
      m.err_in = rates.err_in.value_or(0.0);
      m.err_out = rates.err_out.value_or(0.0);
    });
  }
  write_metrics_csv(m, out_path(opt.out_dir, "metrics.csv"));
  print_kv("fpr95", m.fpr95);
  print_kv("auroc", m.auroc);
  print_kv("tpr", m.tpr);
  print_kv("err_in", m.err_in);
  print_kv("err_out", m.err_out);
}

}  // namespace medix
