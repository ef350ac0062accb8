#include "mkoc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace mkoc {

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

long count_label(const std::vector<Verdict>& vs, Label want) {
  return std::count_if(vs.begin(), vs.end(),
                       [&](const Verdict& v) { return v.label == want; });
}

}  // namespace

double gmean(const ConfusionCounts& c) {
  const long pred_pos = c.tp + c.fp;
  const long actual_pos = c.tp + c.fn;
  const double precision =
      pred_pos > 0 ? static_cast<double>(c.tp) / static_cast<double>(pred_pos)
                   : 0.0;
  const double recall =
      actual_pos > 0
          ? static_cast<double>(c.tp) / static_cast<double>(actual_pos)
          : 0.0;
  return std::sqrt(precision * recall);
}

ConfusionCounts evaluate_fold(const MkocModel& model, const FoldSplit& fold) {
  const std::vector<Verdict> on_targets = predict(model, fold.test_targets);
  const std::vector<Verdict> on_outliers = predict(model, fold.test_outliers);
  ConfusionCounts c;
  c.tp = count_label(on_targets, Label::Target);
  c.fn = count_label(on_targets, Label::Outlier);
  c.fp = count_label(on_outliers, Label::Target);
  c.tn = count_label(on_outliers, Label::Outlier);
  return c;
}

double eta_m(const ResultTable& t, Index classifier) {
  if (t.means.cols() < 1)
    throw Error(ErrorCode::InvalidArgument, "result table has no datasets");
  return t.means.row(classifier).mean();
}

double eta_p(const ResultTable& t, Index classifier) {
  double sum = 0.0;
  for (Index j = 0; j < t.means.cols(); ++j) {
    const double best = t.means.col(j).maxCoeff();
    if (best <= 0.0)
      throw Error(ErrorCode::InvalidArgument,
                  "dataset column '" + t.datasets[static_cast<std::size_t>(j)] +
                      "' has no positive score");
    sum += 100.0 * t.means(classifier, j) / best;
  }
  return sum / static_cast<double>(t.means.cols());
}

Vector friedman_mean_ranks(const Matrix& cells) {
  const Index k = cells.rows();
  const Index n = cells.cols();
  if (k < 2)
    throw Error(ErrorCode::InvalidArgument,
                "Friedman ranking needs at least 2 classifiers");
  Vector mean_ranks = Vector::Zero(k);
  std::vector<Index> order(static_cast<std::size_t>(k));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
    auto score = [&](Index i) { return round2(cells(i, j)); };
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return score(a) > score(b); });
    // average rank over each tied block
    Index pos = 0;
    while (pos < k) {
      Index end = pos;
      while (end + 1 < k && score(order[static_cast<std::size_t>(end + 1)]) ==
                                score(order[static_cast<std::size_t>(pos)]))
        ++end;
      const double rank =
          0.5 * static_cast<double>(pos + 1 + end + 1);  // 1-based mean
      for (Index q = pos; q <= end; ++q)
        mean_ranks[order[static_cast<std::size_t>(q)]] += rank;
      pos = end + 1;
    }
  }
  mean_ranks /= static_cast<double>(n);
  return mean_ranks;
}

double friedman_chi2(const Vector& mean_ranks, Index n_datasets) {
  const double k = static_cast<double>(mean_ranks.size());
  const double n = static_cast<double>(n_datasets);
  return 12.0 * n / (k * (k + 1.0)) *
         (mean_ranks.squaredNorm() - k * (k + 1.0) * (k + 1.0) / 4.0);
}

double iman_davenport(double chi2_f, Index n_datasets, Index k_classifiers) {
  const double n = static_cast<double>(n_datasets);
  const double k = static_cast<double>(k_classifiers);
  const double denom = n * (k - 1.0) - chi2_f;
  if (denom <= 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "Iman-Davenport denominator is nonpositive");
  return (n - 1.0) * chi2_f / denom;
}

namespace {

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;  // converged to working precision for all sane df
}

double betainc(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double f_survival(double f, double df1, double df2) {
  if (df1 <= 0.0 || df2 <= 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "F distribution needs positive degrees of freedom");
  if (f <= 0.0) return 1.0;
  const double x = df2 / (df2 + df1 * f);
  return betainc(df2 / 2.0, df1 / 2.0, x);
}

double f_critical(double alpha, double df1, double df2) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  double lo = 0.0;
  double hi = 1.0;
  while (f_survival(hi, df1, df2) > alpha) hi *= 2.0;  // bracket
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f_survival(mid, df1, df2) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

StatsReport compute_stats(const ResultTable& t) {
  const Index k = t.means.rows();
  const Index n = t.means.cols();
  StatsReport report;
  report.classifiers = t.classifiers;
  report.eta_m.resize(k);
  report.eta_p.resize(k);
  for (Index i = 0; i < k; ++i) {
    report.eta_m[i] = eta_m(t, i);
    report.eta_p[i] = eta_p(t, i);
  }
  report.eta_f = friedman_mean_ranks(t.means);
  report.chi2_f = friedman_chi2(report.eta_f, n);
  const double df1 = static_cast<double>(k - 1);
  const double df2 = static_cast<double>((k - 1) * (n - 1));
  if (static_cast<double>(n) * (static_cast<double>(k) - 1.0) - report.chi2_f >
      0.0) {
    report.f_f = iman_davenport(report.chi2_f, n, k);
    report.p_value = f_survival(report.f_f, df1, df2);
  } else {
    // complete agreement across datasets: chi2 at its maximum, the
    // Iman-Davenport statistic diverges
    report.f_f = std::numeric_limits<double>::infinity();
    report.p_value = 0.0;
  }
  report.f_crit_05 = f_critical(0.05, df1, df2);
  return report;
}

std::vector<MkocConfig> enumerate_grid(const GridSpec& grid,
                                       std::uint64_t seed) {
  if (grid.c_grid.empty() || grid.lambda_grid.empty() ||
      grid.depth_grid.empty() ||
      (grid.graph == GraphKind::Cda && grid.cluster_grid.empty()))
    throw Error(ErrorCode::InvalidArgument, "empty hyperparameter grid");

  const std::vector<int> clusters =
      grid.graph == GraphKind::Cda ? grid.cluster_grid : std::vector<int>{0};

  std::vector<MkocConfig> configs;
  for (int depth : grid.depth_grid)
    for (double c : grid.c_grid)
      for (double lambda : grid.lambda_grid)
        for (int n_clusters : clusters) {
          MkocConfig cfg;
          cfg.depth = depth;
          cfg.graph.kind = grid.graph;
          cfg.graph.knn_k = grid.knn_k;
          cfg.graph.lle_reg = grid.lle_reg;
          if (grid.graph == GraphKind::Cda) cfg.graph.cda_clusters = n_clusters;
          cfg.layers = {LayerHyperparams{c, lambda}};
          cfg.threshold = grid.threshold;
          cfg.eta = grid.eta;
          cfg.r = grid.r;
          cfg.seed = seed;
          configs.push_back(cfg);
        }
  return configs;
}

CellResult evaluate_config(const OneClassTask& task, const MkocConfig& cfg,
                           int folds, int runs, std::uint64_t seed) {
  if (runs < 1)
    throw Error(ErrorCode::InvalidArgument, "need at least one run");
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(runs * folds));
  for (int run = 0; run < runs; ++run) {
    const std::vector<FoldSplit> splits =
        kfold_split(task, folds, seed + static_cast<std::uint64_t>(run));
    for (const FoldSplit& fold : splits) {
      const MinMaxScaler scaler = MinMaxScaler::fit(fold.train_targets);
      FoldSplit scaled;
      scaled.index = fold.index;
      scaled.train_targets = scaler.apply(fold.train_targets);
      scaled.test_targets = scaler.apply(fold.test_targets);
      scaled.test_outliers = scaler.apply(fold.test_outliers);
      const MkocModel model = fit(scaled.train_targets, cfg);
      scores.push_back(100.0 * gmean(evaluate_fold(model, scaled)));
    }
  }
  const double n = static_cast<double>(scores.size());
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  const double std_dev = n > 1.0 ? std::sqrt(var / (n - 1.0)) : 0.0;
  return CellResult{cfg, mean, std_dev};
}

CellResult grid_search(const OneClassTask& task, const GridSpec& grid,
                       int folds, int runs, std::uint64_t seed, int jobs) {
  const std::vector<MkocConfig> configs = enumerate_grid(grid, seed);
  std::vector<CellResult> results(configs.size());

  const int workers = std::max(
      1, std::min<int>(jobs, static_cast<int>(configs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < configs.size(); ++i)
      results[i] = evaluate_config(task, configs[i], folds, runs, seed);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next.fetch_add(1); i < configs.size();
               i = next.fetch_add(1))
            results[i] = evaluate_config(task, configs[i], folds, runs, seed);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // first config wins ties, so selection is independent of thread count
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].mean_gmean > results[best].mean_gmean) best = i;
  return results[best];
}

}  // namespace mkoc
