// Command-line front end. Everything goes through the C API in mkoc/mkoc.h;
// results land in files or stdout, logs on stderr.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "mkoc/mkoc.h"

namespace {

int report_failure(const char* command, mkoc_status status) {
  std::fprintf(stderr, "mkoc %s: error %d: %s\n", command,
               static_cast<int>(status), mkoc_last_error());
  return 1;
}

struct CommonFlags {
  int folds = -1;
  int runs = -1;
  int jobs = -1;
  long long seed = -1;
  std::string classifiers;
  std::string out_dir;

  void attach(CLI::App* cmd) {
    cmd->add_option("--folds", folds, "cross-validation folds (overrides config)");
    cmd->add_option("--runs", runs, "CV repetitions (overrides config)");
    cmd->add_option("--jobs", jobs, "worker threads for the grid search");
    cmd->add_option("--seed", seed, "base RNG seed (overrides config)");
  }

  mkoc_run_overrides overrides() const {
    mkoc_run_overrides ov;
    mkoc_run_overrides_init(&ov);
    ov.folds = folds;
    ov.runs = runs;
    ov.jobs = jobs;
    ov.seed = seed;
    if (!classifiers.empty()) ov.classifiers = classifiers.c_str();
    if (!out_dir.empty()) ov.output_dir = out_dir.c_str();
    return ov;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-embedded multi-layer kernel one-class classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mkoc_version());

  // fit
  std::string fit_config, fit_task, fit_classifier, fit_out;
  CommonFlags fit_flags;
  CLI::App* fit = app.add_subcommand(
      "fit", "grid-search one classifier on one task and save the model");
  fit->add_option("--config", fit_config, "run configuration file")->required();
  fit->add_option("--task", fit_task, "task name, e.g. iris(1)")->required();
  fit->add_option("--classifier", fit_classifier, "classifier name")->required();
  fit->add_option("--out", fit_out, "model output path")->required();
  fit_flags.attach(fit);

  // predict
  std::string pred_model, pred_input, pred_out, pred_delim = ",";
  int pred_label_column = -1;
  bool pred_header = false;
  CLI::App* pred =
      app.add_subcommand("predict", "score a feature CSV with a saved model");
  pred->add_option("--model", pred_model, "model file from fit")->required();
  pred->add_option("--input", pred_input, "input CSV of feature rows")->required();
  pred->add_option("--out", pred_out, "output CSV (row_index,score,label)")
      ->required();
  pred->add_option("--delimiter", pred_delim, "field delimiter (default ,)");
  pred->add_flag("--header", pred_header, "skip the first input row");
  pred->add_option("--label-column", pred_label_column,
                   "drop this 0-based column before scoring");

  // benchmark
  std::string bench_config;
  CommonFlags bench_flags;
  CLI::App* bench = app.add_subcommand(
      "benchmark", "run every configured classifier over the manifest");
  bench->add_option("--config", bench_config, "run configuration file")
      ->required();
  bench->add_option("--classifier", bench_flags.classifiers,
                    "comma-separated classifier subset (overrides config)");
  bench->add_option("--out", bench_flags.out_dir,
                    "output directory (overrides config)");
  bench_flags.attach(bench);

  // stats
  std::string stats_table, stats_out;
  CLI::App* stats = app.add_subcommand(
      "stats", "recompute ranking statistics from a gmean table CSV");
  stats->add_option("--table", stats_table, "gmean table CSV")->required();
  stats->add_option("--out", stats_out,
                    "directory for stats.csv/friedman.csv/stats.txt");

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) {
    const mkoc_run_overrides ov = fit_flags.overrides();
    char* report = nullptr;
    const mkoc_status status =
        mkoc_run_fit(fit_config.c_str(), fit_task.c_str(),
                     fit_classifier.c_str(), &ov, fit_out.c_str(), &report);
    if (status != MKOC_OK) return report_failure("fit", status);
    std::fputs(report, stdout);
    mkoc_string_free(report);
    std::fprintf(stderr, "model written to %s\n", fit_out.c_str());
    return 0;
  }

  if (pred->parsed()) {
    if (pred_delim.size() != 1) {
      std::fprintf(stderr, "mkoc predict: delimiter must be one character\n");
      return 1;
    }
    const mkoc_status status =
        mkoc_run_predict(pred_model.c_str(), pred_input.c_str(), pred_delim[0],
                         pred_header ? 1 : 0, pred_label_column,
                         pred_out.c_str());
    if (status != MKOC_OK) return report_failure("predict", status);
    return 0;
  }

  if (bench->parsed()) {
    const mkoc_run_overrides ov = bench_flags.overrides();
    const mkoc_status status = mkoc_run_benchmark(bench_config.c_str(), &ov);
    if (status != MKOC_OK) return report_failure("benchmark", status);
    return 0;
  }

  if (stats->parsed()) {
    char* report = nullptr;
    const mkoc_status status =
        mkoc_run_stats(stats_table.c_str(),
                       stats_out.empty() ? nullptr : stats_out.c_str(), &report);
    if (status != MKOC_OK) return report_failure("stats", status);
    std::fputs(report, stdout);
    mkoc_string_free(report);
    return 0;
  }

  return 1;
}
