#ifndef MKOC_BENCHMARK_HPP
#define MKOC_BENCHMARK_HPP

#include <map>
#include <string>
#include <vector>

#include "mkoc/evaluation.hpp"
#include "mkoc/model_io.hpp"

namespace mkoc {

struct RunConfig {
  std::string manifest;
  std::string output_dir;
  std::vector<std::string> classifiers;
  std::map<std::string, GridSpec> grids;  // per classifier
  int folds = 5;
  int runs = 5;
  int jobs = 1;
  std::uint64_t seed = 1;
};

// Registered classifiers with the published hyperparameter ranges:
// C and lambda from 2^-3..2^3, clusters 2..20 for CDA graphs, up to 5
// layers for the multi-layer variants, eta 0.05.
const std::map<std::string, GridSpec>& classifier_registry();

// Flat key=value file with [classifier] sections overriding grid defaults.
RunConfig load_run_config(const std::string& path);

struct BestConfigRow {
  std::string classifier;
  std::string task;
  MkocConfig config;
  double mean_gmean = 0.0;
  double std_gmean = 0.0;
};

struct BenchmarkResult {
  ResultTable table;  // means at full precision
  StatsReport stats;  // computed on 2-decimal cells, matching the CSV output
  std::vector<BestConfigRow> best;
};

// Grid-search every configured classifier on every manifest task. Writes
// gmean.csv/gmean.txt, stats.csv/friedman.csv/stats.txt and
// best_configs.csv under output_dir when it is nonempty; reruns with the
// same config and seed are byte-identical.
BenchmarkResult run_benchmark(const RunConfig& cfg);

// Gmean table reader for stats regeneration; cells are numbers or
// "mean (std)".
ResultTable read_gmean_table(const std::string& path);

StatsReport stats_from_table_file(const std::string& path);

void write_stats_files(const StatsReport& report, const std::string& out_dir);
std::string format_stats_text(const StatsReport& report);

struct TaskFitResult {
  ModelBundle bundle;
  BestConfigRow selection;
  std::string report;  // threshold, per-layer sigma and residuals
};

// Grid-search one classifier on one manifest task, then refit on every
// target sample with the winning config.
TaskFitResult fit_task(const RunConfig& cfg, const std::string& task_name,
                       const std::string& classifier);

}  // namespace mkoc

#endif
