#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace sddmon::cli;
  CLI::App app{"sddmon: statistical-distance scope compliance monitor"};
  app.require_subcommand(1);

  PowerArgs power;
  auto* p = app.add_subcommand("power", "bootstrapped power analysis for the window size n*");
  p->add_option("train_csv", power.train_csv, "in-scope training features")->required();
  p->add_option("ood_csv", power.ood_csv, "out-of-scope features")->required();
  p->add_option("--alpha", power.alpha, "significance level before Bonferroni adjustment")
      ->capture_default_str();
  p->add_option("--trials", power.trials, "bootstrap trials per size")->capture_default_str();
  p->add_option("--sizes", power.sizes, "start:stop:step or comma list")->capture_default_str();
  p->add_option("--kind", power.kind, "KS, AD or ES")->capture_default_str();
  p->add_option("--seed", power.seed)->capture_default_str();
  p->add_option("--target-variance", power.target_variance,
                "project through PCA fitted on train first (0 disables)")
      ->capture_default_str();
  p->add_option("--out", power.out_json, "write the JSON report here instead of stdout");
  p->add_option("--csv", power.out_csv, "also write size,power rows here");

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "fit PCA and uncertainty estimators into a scope model");
  c->add_option("cal_csv", cal.cal_csv, "labelled calibration features")->required();
  c->add_option("ref_csv", cal.ref_csv, "reference (training) features")->required();
  c->add_option("--out", cal.out, "scope model JSON path")->required();
  c->add_option("--n", cal.n, "rows per calibration batch")->capture_default_str();
  c->add_option("--m", cal.m, "batch count minus one (ratios i/m, i=0..m)")->capture_default_str();
  c->add_option("--window", cal.window, "monitor window size (default: --n)");
  c->add_option("--kinds", cal.kinds)->capture_default_str();
  c->add_option("--forms", cal.forms, "form for all kinds, or KIND=form,...");
  c->add_option("--target-variance", cal.target_variance)->capture_default_str();
  c->add_flag("--standardize", cal.standardize, "z-score features before PCA");
  c->add_flag("--with-replacement", cal.with_replacement, "sample calibration rows with replacement");
  c->add_flag("--ref-by-path", cal.ref_by_path, "store the reference CSV path and digest");
  c->add_option("--seed", cal.seed)->capture_default_str();
  c->add_option("--points", cal.points_csv, "write calibration points CSV");

  MonitorArgs mon;
  auto* m = app.add_subcommand("monitor", "run the monitor over a recorded stream");
  m->add_option("stream_csv", mon.stream_csv)->required();
  m->add_option("scope_model", mon.model)->required();
  m->add_option("--threshold", mon.threshold)->capture_default_str();
  m->add_option("--stride", mon.stride, "samples between reports (default: window)");
  m->add_option("--aggregate", mon.aggregate, "max, mean or per-kind")->capture_default_str();
  m->add_option("--kinds", mon.kinds, "subset of the model's kinds");
  m->add_option("--out", mon.out, "JSON-lines output file (default stdout)");
  m->add_option("--truth", mon.truth, "per-sample CSV with a 'correct' column");
  m->add_option("--truth-out", mon.truth_out, "write window_id,inaccuracy for evaluate");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "confusion tables and threshold sweeps");
  e->add_option("reports", ev.reports, "JSON-lines reports")->required();
  e->add_option("truth_csv", ev.truth, "window_id,inaccuracy")->required();
  e->add_option("--threshold", ev.threshold)->capture_default_str();
  e->add_option("--sweep", ev.sweep, "write the threshold / cut-off table here");
  e->add_option("--thresholds", ev.thresholds)->capture_default_str();
  e->add_option("--out", ev.out, "confusion table path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*p) return cmd_power(power, std::cout);
    if (*c) return cmd_calibrate(cal, std::cout);
    if (*m) return cmd_monitor(mon, std::cout, std::cerr);
    if (*e) return cmd_evaluate(ev, std::cout);
  } catch (const sddmon::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
