#ifndef MKOC_EVALUATION_HPP
#define MKOC_EVALUATION_HPP

#include <string>
#include <vector>

#include "mkoc/data.hpp"
#include "mkoc/model.hpp"
#include "mkoc/types.hpp"

namespace mkoc {

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
};

// sqrt(precision * recall) with the target class positive; a 0/0 component
// counts as 0 so degenerate folds stay comparable.
double gmean(const ConfusionCounts& c);

// Score the fold's test targets and outliers with a model fitted on the
// fold's training targets.
ConfusionCounts evaluate_fold(const MkocModel& model, const FoldSplit& fold);

// rows = classifiers, cols = datasets, cells = mean Gmean in percent.
struct ResultTable {
  std::vector<std::string> classifiers;
  std::vector<std::string> datasets;
  Matrix means;
  Matrix stds;
};

double eta_m(const ResultTable& t, Index classifier);
double eta_p(const ResultTable& t, Index classifier);

// Mean rank per classifier; rank 1 is the best score per dataset, ties get
// the average rank. Cells are compared at 2-decimal precision, matching
// printed tables.
Vector friedman_mean_ranks(const Matrix& cells);

double friedman_chi2(const Vector& mean_ranks, Index n_datasets);
double iman_davenport(double chi2_f, Index n_datasets, Index k_classifiers);

// Survival function of the F distribution via the regularized incomplete
// beta function (continued fraction, |error| well under 1e-8).
double f_survival(double f, double df1, double df2);
// Upper critical value: f_survival(result, df1, df2) == alpha.
double f_critical(double alpha, double df1, double df2);

struct StatsReport {
  std::vector<std::string> classifiers;
  Vector eta_m;
  Vector eta_p;
  Vector eta_f;
  double chi2_f = 0.0;
  double f_f = 0.0;
  double p_value = 1.0;
  double f_crit_05 = 0.0;
};

StatsReport compute_stats(const ResultTable& t);

// Hyperparameter grid for one classifier on one task.
struct GridSpec {
  GraphKind graph = GraphKind::Zero;
  ThresholdKind threshold = ThresholdKind::Theta1;
  std::vector<double> c_grid{1.0};
  std::vector<double> lambda_grid{1.0};
  std::vector<int> depth_grid{1};
  std::vector<int> cluster_grid{2};  // CDA only
  int knn_k = 10;
  double lle_reg = 1e-3;
  double eta = 0.05;
  double r = 1.0;
};

// Grid enumeration order fixes the tie-break: first config with the best
// mean wins. Order: depth, then C, then lambda, then clusters.
std::vector<MkocConfig> enumerate_grid(const GridSpec& grid, std::uint64_t seed);

struct CellResult {
  MkocConfig best;
  double mean_gmean = 0.0;  // percent
  double std_gmean = 0.0;   // sample std over runs x folds, percent
};

// Mean (std) Gmean of one config over `runs` repetitions of `folds`-fold CV.
// Run r shuffles with seed+r; min-max normalization is fitted per training
// fold.
CellResult evaluate_config(const OneClassTask& task, const MkocConfig& cfg,
                           int folds, int runs, std::uint64_t seed);

// Exhaustive search; configs are independent and may be evaluated on up to
// `jobs` threads without affecting the result.
CellResult grid_search(const OneClassTask& task, const GridSpec& grid,
                       int folds, int runs, std::uint64_t seed, int jobs = 1);

}  // namespace mkoc

#endif
