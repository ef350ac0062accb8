#include "mkoc/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace mkoc {

namespace {

std::string fmt(const char* pattern, ...) {
  char buf[256];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& token, const std::string& where) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != token.size() || token.empty())
    throw Error(ErrorCode::Parse, where + ": bad number '" + token + "'");
  return v;
}

long parse_long(const std::string& token, const std::string& where) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(token, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != token.size() || token.empty())
    throw Error(ErrorCode::Parse, where + ": bad integer '" + token + "'");
  return v;
}

std::vector<double> parse_double_list(const std::string& s,
                                      const std::string& where) {
  std::vector<double> out;
  for (const std::string& t : split_list(s)) out.push_back(parse_double(t, where));
  if (out.empty()) throw Error(ErrorCode::Parse, where + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& where) {
  std::vector<int> out;
  for (const std::string& t : split_list(s))
    out.push_back(static_cast<int>(parse_long(t, where)));
  if (out.empty()) throw Error(ErrorCode::Parse, where + ": empty list");
  return out;
}

GraphKind parse_graph(const std::string& s, const std::string& where) {
  if (s == "zero") return GraphKind::Zero;
  if (s == "le_knn") return GraphKind::LeKnn;
  if (s == "lle") return GraphKind::Lle;
  if (s == "lda") return GraphKind::LdaCentering;
  if (s == "cda") return GraphKind::Cda;
  throw Error(ErrorCode::Parse, where + ": unknown graph '" + s + "'");
}

ThresholdKind parse_threshold(const std::string& s, const std::string& where) {
  if (s == "theta1") return ThresholdKind::Theta1;
  if (s == "theta2") return ThresholdKind::Theta2;
  throw Error(ErrorCode::Parse, where + ": unknown threshold '" + s + "'");
}

std::vector<double> pow2_grid(int lo, int hi) {
  std::vector<double> g;
  for (int e = lo; e <= hi; ++e) g.push_back(std::pow(2.0, e));
  return g;
}

std::vector<int> int_range(int lo, int hi) {
  std::vector<int> g(static_cast<std::size_t>(hi - lo + 1));
  std::iota(g.begin(), g.end(), lo);
  return g;
}

}  // namespace

const std::map<std::string, GridSpec>& classifier_registry() {
  static const std::map<std::string, GridSpec> registry = [] {
    const std::vector<double> reg_grid = pow2_grid(-3, 3);
    const std::vector<int> clusters = int_range(2, 20);
    const std::vector<int> multi_depth = int_range(1, 5);

    std::map<std::string, GridSpec> r;
    auto add = [&](const std::string& name, GraphKind graph,
                   ThresholdKind threshold, bool multi_layer) {
      GridSpec g;
      g.graph = graph;
      g.threshold = threshold;
      g.c_grid = reg_grid;
      // plain ridge: lambda/C act as one knob, pin lambda at 1 so C alone
      // spans the published range
      g.lambda_grid = graph == GraphKind::Zero ? std::vector<double>{1.0}
                                               : reg_grid;
      if (graph == GraphKind::Cda) g.cluster_grid = clusters;
      g.depth_grid = multi_layer ? multi_depth : std::vector<int>{1};
      r.emplace(name, std::move(g));
    };
    add("KOC", GraphKind::Zero, ThresholdKind::Theta1, false);
    add("LKOC-LE", GraphKind::LeKnn, ThresholdKind::Theta1, false);
    add("LKOC-LLE", GraphKind::Lle, ThresholdKind::Theta1, false);
    add("GKOC-LDA", GraphKind::LdaCentering, ThresholdKind::Theta1, false);
    add("GKOC-CDA", GraphKind::Cda, ThresholdKind::Theta1, false);
    add("LMKOC-LLE_theta1", GraphKind::Lle, ThresholdKind::Theta1, true);
    add("LMKOC-LLE_theta2", GraphKind::Lle, ThresholdKind::Theta2, true);
    add("GMKOC-CDA_theta1", GraphKind::Cda, ThresholdKind::Theta1, true);
    add("GMKOC-CDA_theta2", GraphKind::Cda, ThresholdKind::Theta2, true);
    return r;
  }();
  return registry;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  RunConfig cfg;
  cfg.grids = classifier_registry();
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(line_no);
    if (stripped.front() == '[') {
      if (stripped.back() != ']')
        throw Error(ErrorCode::Parse, where + ": unterminated section header");
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section.empty())
        throw Error(ErrorCode::Parse, where + ": empty section name");
      cfg.grids.try_emplace(section);  // unregistered names start from defaults
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Parse, where + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    if (section.empty()) {
      if (key == "manifest") {
        std::filesystem::path p(value);
        cfg.manifest = p.is_relative() ? (base / p).string() : value;
      } else if (key == "output_dir") {
        cfg.output_dir = value;
      } else if (key == "classifiers") {
        cfg.classifiers = split_list(value);
      } else if (key == "folds") {
        cfg.folds = static_cast<int>(parse_long(value, where));
      } else if (key == "runs") {
        cfg.runs = static_cast<int>(parse_long(value, where));
      } else if (key == "jobs") {
        cfg.jobs = static_cast<int>(parse_long(value, where));
      } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_long(value, where));
      } else {
        throw Error(ErrorCode::Parse, where + ": unknown key '" + key + "'");
      }
      continue;
    }

    GridSpec& g = cfg.grids.at(section);
    if (key == "graph") {
      g.graph = parse_graph(value, where);
    } else if (key == "threshold") {
      g.threshold = parse_threshold(value, where);
    } else if (key == "c_grid") {
      g.c_grid = parse_double_list(value, where);
    } else if (key == "lambda_grid") {
      g.lambda_grid = parse_double_list(value, where);
    } else if (key == "depth_grid") {
      g.depth_grid = parse_int_list(value, where);
    } else if (key == "cluster_grid") {
      g.cluster_grid = parse_int_list(value, where);
    } else if (key == "knn_k") {
      g.knn_k = static_cast<int>(parse_long(value, where));
    } else if (key == "lle_reg") {
      g.lle_reg = parse_double(value, where);
    } else if (key == "eta") {
      g.eta = parse_double(value, where);
    } else if (key == "r") {
      g.r = parse_double(value, where);
    } else {
      throw Error(ErrorCode::Parse, where + ": unknown key '" + key + "'");
    }
  }

  if (cfg.manifest.empty())
    throw Error(ErrorCode::Parse, path + ": missing 'manifest'");
  if (cfg.classifiers.empty())
    throw Error(ErrorCode::Parse, path + ": missing 'classifiers'");
  if (cfg.folds < 2)
    throw Error(ErrorCode::InvalidArgument, path + ": folds must be >= 2");
  if (cfg.runs < 1)
    throw Error(ErrorCode::InvalidArgument, path + ": runs must be >= 1");
  for (const std::string& name : cfg.classifiers)
    if (cfg.grids.find(name) == cfg.grids.end())
      throw Error(ErrorCode::InvalidArgument,
                  path + ": classifier '" + name +
                      "' is neither registered nor configured");
  return cfg;
}

namespace {

std::vector<OneClassTask> load_all_tasks(const std::string& manifest) {
  std::vector<OneClassTask> tasks;
  for (const ManifestEntry& entry : load_manifest(manifest)) {
    const LabeledDataset ds = load_csv(entry.path, entry.schema, entry.name);
    for (OneClassTask& t : make_oneclass_tasks(ds)) tasks.push_back(std::move(t));
  }
  return tasks;
}

std::string cell_text(double mean, double std_dev) {
  return fmt("%.2f (%.2f)", mean, std_dev);
}

void write_gmean_csv(const ResultTable& t, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << "classifier";
  for (const std::string& d : t.datasets) out << "," << d;
  out << "\n";
  for (Index i = 0; i < t.means.rows(); ++i) {
    out << t.classifiers[static_cast<std::size_t>(i)];
    for (Index j = 0; j < t.means.cols(); ++j)
      out << "," << cell_text(t.means(i, j), t.stds(i, j));
    out << "\n";
  }
}

void write_gmean_text(const ResultTable& t, const std::string& path) {
  std::size_t name_w = 10;
  for (const std::string& c : t.classifiers) name_w = std::max(name_w, c.size());
  std::size_t cell_w = 14;
  for (const std::string& d : t.datasets) cell_w = std::max(cell_w, d.size());

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << fmt("%-*s", static_cast<int>(name_w), "classifier");
  for (const std::string& d : t.datasets)
    out << fmt("  %*s", static_cast<int>(cell_w), d.c_str());
  out << "\n";
  for (Index i = 0; i < t.means.rows(); ++i) {
    out << fmt("%-*s", static_cast<int>(name_w),
               t.classifiers[static_cast<std::size_t>(i)].c_str());
    for (Index j = 0; j < t.means.cols(); ++j)
      out << fmt("  %*s", static_cast<int>(cell_w),
                 cell_text(t.means(i, j), t.stds(i, j)).c_str());
    out << "\n";
  }
}

void write_best_configs(const std::vector<BestConfigRow>& rows,
                        const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << "classifier,task,depth,c,lambda,clusters,mean_gmean,std_gmean\n";
  for (const BestConfigRow& r : rows) {
    const LayerHyperparams hp = r.config.layers.front();
    out << r.classifier << "," << r.task << "," << r.config.depth << ","
        << fmt("%g", hp.c) << "," << fmt("%g", hp.lambda) << ",";
    if (r.config.graph.kind == GraphKind::Cda)
      out << r.config.graph.cda_clusters;
    out << "," << fmt("%.2f", r.mean_gmean) << "," << fmt("%.2f", r.std_gmean)
        << "\n";
  }
}

}  // namespace

std::string format_stats_text(const StatsReport& report) {
  std::vector<Index> order(static_cast<std::size_t>(report.eta_f.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return report.eta_f[a] < report.eta_f[b];
  });

  std::size_t name_w = 10;
  for (const std::string& c : report.classifiers)
    name_w = std::max(name_w, c.size());

  std::ostringstream out;
  out << fmt("%-*s  %8s  %8s  %8s\n", static_cast<int>(name_w), "classifier",
             "eta_f", "eta_m", "eta_p");
  for (Index i : order)
    out << fmt("%-*s  %8.2f  %8.2f  %8.2f\n", static_cast<int>(name_w),
               report.classifiers[static_cast<std::size_t>(i)].c_str(),
               report.eta_f[i], report.eta_m[i], report.eta_p[i]);
  out << "\n";
  out << fmt("friedman chi2        : %.4f\n", report.chi2_f);
  out << fmt("iman-davenport F     : %.4f\n", report.f_f);
  out << fmt("p-value              : %.4e\n", report.p_value);
  out << fmt("F critical (a=0.05)  : %.4f\n", report.f_crit_05);
  return out.str();
}

void write_stats_files(const StatsReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "stats.csv", std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write stats.csv");
    out << "classifier,eta_m,eta_p,eta_f\n";
    for (std::size_t i = 0; i < report.classifiers.size(); ++i)
      out << report.classifiers[i] << ","
          << fmt("%.4f", report.eta_m[static_cast<Index>(i)]) << ","
          << fmt("%.4f", report.eta_p[static_cast<Index>(i)]) << ","
          << fmt("%.4f", report.eta_f[static_cast<Index>(i)]) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "friedman.csv", std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write friedman.csv");
    out << "chi2_f,f_f,p_value,f_critical_05\n";
    out << fmt("%.6f,%.6f,%.6e,%.6f\n", report.chi2_f, report.f_f,
               report.p_value, report.f_crit_05);
  }
  {
    std::ofstream out(fs::path(out_dir) / "stats.txt", std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write stats.txt");
    out << format_stats_text(report);
  }
}

BenchmarkResult run_benchmark(const RunConfig& cfg) {
  const std::vector<OneClassTask> tasks = load_all_tasks(cfg.manifest);

  BenchmarkResult result;
  ResultTable& table = result.table;
  table.classifiers = cfg.classifiers;
  for (const OneClassTask& t : tasks) table.datasets.push_back(t.name);
  table.means.setZero(static_cast<Index>(cfg.classifiers.size()),
                      static_cast<Index>(tasks.size()));
  table.stds.setZero(table.means.rows(), table.means.cols());

  for (std::size_t i = 0; i < cfg.classifiers.size(); ++i) {
    const std::string& name = cfg.classifiers[i];
    const GridSpec& grid = cfg.grids.at(name);
    for (std::size_t j = 0; j < tasks.size(); ++j) {
      const CellResult cell =
          grid_search(tasks[j], grid, cfg.folds, cfg.runs, cfg.seed, cfg.jobs);
      table.means(static_cast<Index>(i), static_cast<Index>(j)) = cell.mean_gmean;
      table.stds(static_cast<Index>(i), static_cast<Index>(j)) = cell.std_gmean;
      result.best.push_back(BestConfigRow{name, tasks[j].name, cell.best,
                                          cell.mean_gmean, cell.std_gmean});
      std::cerr << fmt("[bench] %s on %s: %.2f (%.2f)\n", name.c_str(),
                       tasks[j].name.c_str(), cell.mean_gmean, cell.std_gmean);
    }
  }

  if (table.means.rows() >= 2 && table.means.cols() >= 1) {
    // stats run on the same 2-decimal cells the CSV reports, so regenerating
    // them from gmean.csv gives identical numbers
    ResultTable rounded = table;
    rounded.means = rounded.means.unaryExpr([](double v) { return round2(v); });
    result.stats = compute_stats(rounded);
  }

  if (!cfg.output_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    write_gmean_csv(table, (fs::path(cfg.output_dir) / "gmean.csv").string());
    write_gmean_text(table, (fs::path(cfg.output_dir) / "gmean.txt").string());
    write_best_configs(
        result.best, (fs::path(cfg.output_dir) / "best_configs.csv").string());
    if (!result.stats.classifiers.empty()) write_stats_files(result.stats, cfg.output_dir);
  }
  return result;
}

ResultTable read_gmean_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open table '" + path + "'");

  ResultTable t;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> stds;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    std::vector<std::string> fields;
    {
      std::string field;
      std::istringstream fs(stripped);
      while (std::getline(fs, field, ',')) fields.push_back(trim(field));
    }
    if (t.datasets.empty()) {
      if (fields.size() < 2)
        throw Error(ErrorCode::Parse,
                    path + ":1: header must name at least one dataset");
      t.datasets.assign(fields.begin() + 1, fields.end());
      continue;
    }
    if (fields.size() != t.datasets.size() + 1) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected " << t.datasets.size() + 1
          << " fields, got " << fields.size();
      throw Error(ErrorCode::Parse, msg.str());
    }
    t.classifiers.push_back(fields[0]);
    std::vector<double> m_row, s_row;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const std::string where = path + ":" + std::to_string(line_no);
      std::string cell = fields[c];
      double std_dev = 0.0;
      const std::size_t paren = cell.find('(');
      if (paren != std::string::npos) {
        const std::size_t close = cell.find(')', paren);
        if (close == std::string::npos)
          throw Error(ErrorCode::Parse, where + ": unterminated '(' in cell");
        std_dev = parse_double(trim(cell.substr(paren + 1, close - paren - 1)),
                               where);
        cell = trim(cell.substr(0, paren));
      }
      m_row.push_back(parse_double(cell, where));
      s_row.push_back(std_dev);
    }
    means.push_back(std::move(m_row));
    stds.push_back(std::move(s_row));
  }
  if (t.classifiers.empty())
    throw Error(ErrorCode::Parse, path + ": table has no classifier rows");

  t.means.resize(static_cast<Index>(means.size()),
                 static_cast<Index>(t.datasets.size()));
  t.stds.resize(t.means.rows(), t.means.cols());
  for (Index i = 0; i < t.means.rows(); ++i)
    for (Index j = 0; j < t.means.cols(); ++j) {
      t.means(i, j) = means[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      t.stds(i, j) = stds[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  return t;
}

StatsReport stats_from_table_file(const std::string& path) {
  return compute_stats(read_gmean_table(path));
}

TaskFitResult fit_task(const RunConfig& cfg, const std::string& task_name,
                       const std::string& classifier) {
  const auto grid_it = cfg.grids.find(classifier);
  if (grid_it == cfg.grids.end())
    throw Error(ErrorCode::InvalidArgument,
                "unknown classifier '" + classifier + "'");

  const std::vector<OneClassTask> tasks = load_all_tasks(cfg.manifest);
  const auto task_it =
      std::find_if(tasks.begin(), tasks.end(),
                   [&](const OneClassTask& t) { return t.name == task_name; });
  if (task_it == tasks.end())
    throw Error(ErrorCode::InvalidArgument,
                "task '" + task_name + "' not found in manifest");

  const CellResult cell = grid_search(*task_it, grid_it->second, cfg.folds,
                                      cfg.runs, cfg.seed, cfg.jobs);

  TaskFitResult out;
  out.selection = BestConfigRow{classifier, task_name, cell.best,
                                cell.mean_gmean, cell.std_gmean};
  MinMaxScaler scaler = MinMaxScaler::fit(task_it->targets);
  out.bundle.model = fit(scaler.apply(task_it->targets), cell.best);
  out.bundle.scaler = std::move(scaler);

  const MkocModel& m = out.bundle.model;
  std::ostringstream rep;
  rep << "task: " << task_name << "\n";
  rep << "classifier: " << classifier << "\n";
  rep << fmt("cv gmean: %.2f (%.2f)\n", cell.mean_gmean, cell.std_gmean);
  rep << "selected: depth=" << cell.best.depth
      << fmt(" C=%g lambda=%g", cell.best.layers.front().c,
             cell.best.layers.front().lambda);
  if (cell.best.graph.kind == GraphKind::Cda)
    rep << " clusters=" << cell.best.graph.cda_clusters;
  rep << "\n";
  rep << fmt("threshold (%s): %.10g\n",
             m.threshold_kind == ThresholdKind::Theta1 ? "theta1" : "theta2",
             m.threshold);
  for (std::size_t h = 0; h < m.encoders.size(); ++h)
    rep << fmt("layer %zu: sigma=%.6g residual=%.3e\n", h + 1,
               m.encoders[h].sigma, m.encoders[h].residual);
  rep << fmt("head layer %zu: sigma=%.6g residual=%.3e\n",
             m.encoders.size() + 1, m.head.sigma, m.head.residual);
  out.report = rep.str();
  return out;
}

}  // namespace mkoc
