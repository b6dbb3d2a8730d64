// medix command-line front end. Exit codes: 0 success, 2 configuration or
// usage error, 3 pipeline stage failure.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "medix/commands.hpp"

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("MEDIX_OUT_DIR");
  return env && *env ? env : ".";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"medix: median-filtered out-of-distribution detection toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file ([subcommand] sections); flags win");

  const std::string out_default = default_out_dir();

  medix::Synth2dOptions synth;
  synth.out_dir = out_default;
  auto* s2 = app.add_subcommand("synth2d", "2-D Gaussian world end-to-end pipeline");
  s2->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
  s2->add_option("--out", synth.out_dir, "output directory")->capture_default_str();
  s2->add_option("--threads", synth.threads, "filter worker threads")->capture_default_str();
  s2->add_option("--pi", synth.pi, "wild contamination proportion, (0,1]")
      ->capture_default_str();
  s2->add_option("--n-per-class", synth.n_per_class, "train samples per class")
      ->capture_default_str();
  s2->add_option("--conf-threshold", synth.conf_threshold,
                 "confidence prefilter threshold, 0 disables")
      ->capture_default_str();
  s2->add_option("--eps-stop", synth.eps_stop, "filter convergence threshold")
      ->capture_default_str();
  s2->add_option("--k", synth.k, "removals per iteration, 0 = m/20")->capture_default_str();
  s2->add_option("--T", synth.T, "max filter iterations")->capture_default_str();
  s2->add_option("--lr", synth.lr, "classifier learning rate")->capture_default_str();
  s2->add_option("--epochs", synth.epochs, "classifier epochs")->capture_default_str();
  s2->add_option("--batch", synth.batch, "classifier batch size")->capture_default_str();
  s2->add_option("--det-lr", synth.det_lr, "detector learning rate")->capture_default_str();
  s2->add_option("--det-epochs", synth.det_epochs, "detector epochs")->capture_default_str();
  s2->add_option("--ind-loss-weight", synth.ind_loss_weight, "binary-term weight")
      ->capture_default_str();
  s2->callback([&] { medix::cmd_synth2d(synth); });

  medix::SweepOptions sweep;
  sweep.out_dir = out_default;
  auto* sw = app.add_subcommand("sweep", "deviation vs injected OOD count");
  sw->add_option("--seed", sweep.seed, "RNG seed")->capture_default_str();
  sw->add_option("--out", sweep.out_dir, "output directory")->capture_default_str();
  sw->add_option("--d", sweep.d, "gradient dimension")->capture_default_str();
  sw->add_option("--sigma", sweep.sigma, "InD noise scale")->capture_default_str();
  sw->add_option("--Delta", sweep.Delta, "per-coordinate separation")->capture_default_str();
  sw->add_option("--ind-rows", sweep.ind_rows, "InD pool size")->capture_default_str();
  sw->add_option("--n-steps", sweep.n_steps, "number of sweep points")->capture_default_str();
  sw->add_option("--step", sweep.step, "OOD rows added per point")->capture_default_str();
  sw->callback([&] { medix::cmd_sweep(sweep); });

  medix::BoundsCmdOptions bounds;
  bounds.out_dir = out_default;
  bounds.inputs.m = 1000;
  bounds.inputs.d = 20;
  bounds.inputs.Delta = 10.0;
  auto* bo = app.add_subcommand("bounds", "closed-form bound table and Monte-Carlo coverage");
  bo->add_option("--seed", bounds.seed, "RNG seed")->capture_default_str();
  bo->add_option("--out", bounds.out_dir, "output directory")->capture_default_str();
  bo->add_option("--threads", bounds.threads, "coverage worker threads")->capture_default_str();
  bo->add_option("--sigma", bounds.inputs.sigma, "InD sub-Gaussian proxy")
      ->capture_default_str();
  bo->add_option("--sigma-out", bounds.inputs.sigma_out, "OOD sub-Gaussian proxy")
      ->capture_default_str();
  bo->add_option("--mu4", bounds.inputs.mu4, "fourth moment (heavy-tail form)")
      ->capture_default_str();
  bo->add_option("--pi", bounds.inputs.pi, "contamination proportion")->capture_default_str();
  bo->add_option("--m", bounds.inputs.m, "wild size")->capture_default_str();
  bo->add_option("--d", bounds.inputs.d, "gradient dimension")->capture_default_str();
  bo->add_option("--delta", bounds.inputs.delta, "confidence level")->capture_default_str();
  bo->add_option("--Delta", bounds.inputs.Delta, "per-coordinate separation")
      ->capture_default_str();
  bo->add_option("--eps-dev", bounds.inputs.eps_dev,
                 "deviation tolerance, 0 = sigma*sqrt(2 ln(2 d m_in))")
      ->capture_default_str();
  bo->add_option("--kind", bounds.kind, "coverage target: inlier|inlier-heavy-tail|outlier")
      ->capture_default_str();
  bo->add_option("--coverage", bounds.coverage_trials, "Monte-Carlo trials, 0 = table only")
      ->capture_default_str();
  bo->add_option("--tail", bounds.tail, "gaussian|student_t")->capture_default_str();
  bo->add_option("--nu", bounds.nu, "Student-t degrees of freedom")->capture_default_str();
  bo->add_option("--eps-stop", bounds.eps_stop, "coverage filter eps_stop, 0 = policy value")
      ->capture_default_str();
  bo->add_option("--k", bounds.k, "coverage filter batch, 0 = policy value")
      ->capture_default_str();
  bo->add_option("--T", bounds.T, "coverage filter max iterations, 0 = policy value")
      ->capture_default_str();
  bo->callback([&] { medix::cmd_bounds(bounds); });

  medix::EwmVsGmOptions evg;
  evg.out_dir = out_default;
  auto* eg = app.add_subcommand("ewm-vs-gm", "aggregator comparison across contamination");
  eg->add_option("--seed", evg.seed, "RNG seed")->capture_default_str();
  eg->add_option("--out", evg.out_dir, "output directory")->capture_default_str();
  eg->add_option("--threads", evg.threads, "filter worker threads")->capture_default_str();
  eg->add_option("--m", evg.m, "wild size per level")->capture_default_str();
  eg->add_option("--d", evg.d, "gradient dimension")->capture_default_str();
  eg->add_option("--sigma", evg.sigma, "InD noise scale")->capture_default_str();
  eg->add_option("--Delta", evg.Delta, "per-coordinate separation")->capture_default_str();
  eg->add_option("--pis", evg.pis, "contamination levels")->capture_default_str();
  eg->add_option("--eps-stop", evg.eps_stop, "filter convergence threshold")
      ->capture_default_str();
  eg->add_option("--k", evg.k, "removals per iteration, 0 = m/20")->capture_default_str();
  eg->add_option("--T", evg.T, "max filter iterations")->capture_default_str();
  eg->callback([&] { medix::cmd_ewm_vs_gm(evg); });

  medix::HyperSweepOptions hyper;
  hyper.out_dir = out_default;
  auto* hs = app.add_subcommand("hyper-sweep", "filter hyperparameter sensitivity grid");
  hs->add_option("--seed", hyper.seed, "RNG seed")->capture_default_str();
  hs->add_option("--out", hyper.out_dir, "output directory")->capture_default_str();
  hs->add_option("--threads", hyper.threads, "filter worker threads")->capture_default_str();
  hs->add_option("--pi", hyper.pi, "wild contamination proportion")->capture_default_str();
  hs->add_option("--n-per-class", hyper.n_per_class, "train samples per class")
      ->capture_default_str();
  hs->add_option("--eps-grid", hyper.eps_grid, "eps_stop grid")->capture_default_str();
  hs->add_option("--k-grid", hyper.k_grid, "k grid")->capture_default_str();
  hs->add_option("--T", hyper.T, "max filter iterations")->capture_default_str();
  hs->add_option("--lr", hyper.lr, "classifier learning rate")->capture_default_str();
  hs->add_option("--epochs", hyper.epochs, "classifier epochs")->capture_default_str();
  hs->add_option("--batch", hyper.batch, "classifier batch size")->capture_default_str();
  hs->add_option("--det-lr", hyper.det_lr, "detector learning rate")->capture_default_str();
  hs->add_option("--det-epochs", hyper.det_epochs, "detector epochs")->capture_default_str();
  hs->add_option("--ind-loss-weight", hyper.ind_loss_weight, "binary-term weight")
      ->capture_default_str();
  hs->callback([&] { medix::cmd_hyper_sweep(hyper); });

  medix::FilterCmdOptions filt;
  filt.out_dir = out_default;
  auto* fi = app.add_subcommand("filter", "filter a raw gradient file");
  fi->add_option("--gradients", filt.gradients_path, "gradient matrix (.csv or .bin)")
      ->required();
  fi->add_option("--ref", filt.ref_path, "reference gradient (1-row matrix file)")
      ->required();
  fi->add_option("--out", filt.out_dir, "output directory")->capture_default_str();
  fi->add_option("--threads", filt.threads, "filter worker threads")->capture_default_str();
  fi->add_option("--eps-stop", filt.eps_stop, "filter convergence threshold")
      ->capture_default_str();
  fi->add_option("--k", filt.k, "removals per iteration, 0 = m/20")->capture_default_str();
  fi->add_option("--T", filt.T, "max filter iterations")->capture_default_str();
  fi->add_option("--agg", filt.agg, "aggregator: ewm|gm")->capture_default_str();
  fi->callback([&] { medix::cmd_filter(filt); });

  medix::MetricsCmdOptions met;
  met.out_dir = out_default;
  auto* me = app.add_subcommand("metrics", "detection metrics from score files");
  me->add_option("--scores-in", met.scores_in_path, "InD scores, one per line")->required();
  me->add_option("--scores-out", met.scores_out_path, "OOD scores, one per line")->required();
  me->add_option("--out", met.out_dir, "output directory")->capture_default_str();
  me->add_option("--tpr", met.tpr_target, "TPR target")->capture_default_str();
  me->add_option("--filter-json", met.filter_json, "filter result for err rates");
  me->add_option("--wild", met.wild_csv, "wild CSV with origin tags");
  me->callback([&] { medix::cmd_metrics(met); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const medix::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const medix::StageError& e) {
    std::cerr << "stage failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
