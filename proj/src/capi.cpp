#include "mkoc/mkoc.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "mkoc/benchmark.hpp"
#include "mkoc/model_io.hpp"

namespace {

thread_local std::string g_last_error;

mkoc_status to_status(mkoc::ErrorCode code) {
  return static_cast<mkoc_status>(static_cast<int>(code));
}

template <typename Fn>
mkoc_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MKOC_OK;
  } catch (const mkoc::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MKOC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MKOC_ERR_INTERNAL;
  }
}

mkoc_status fail(mkoc_status status, const char* message) {
  g_last_error = message;
  return status;
}

mkoc::Matrix map_rows(const double* data, int64_t rows, int64_t cols) {
  if (rows < 0 || cols <= 0)
    throw mkoc::Error(mkoc::ErrorCode::InvalidArgument,
                      "matrix dimensions must be positive");
  return Eigen::Map<const mkoc::Matrix>(data, rows, cols);
}

mkoc::RunConfig config_with_overrides(const char* config_path,
                                      const mkoc_run_overrides* ov) {
  mkoc::RunConfig cfg = mkoc::load_run_config(config_path);
  if (ov == nullptr) return cfg;
  if (ov->folds >= 0) cfg.folds = ov->folds;
  if (ov->runs >= 0) cfg.runs = ov->runs;
  if (ov->jobs >= 0) cfg.jobs = ov->jobs;
  if (ov->seed >= 0) cfg.seed = static_cast<std::uint64_t>(ov->seed);
  if (ov->output_dir != nullptr) cfg.output_dir = ov->output_dir;
  if (ov->classifiers != nullptr) {
    cfg.classifiers.clear();
    std::string item;
    std::istringstream in(ov->classifiers);
    while (std::getline(in, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b != std::string::npos) cfg.classifiers.push_back(item.substr(b, e - b + 1));
    }
    for (const std::string& name : cfg.classifiers)
      if (cfg.grids.find(name) == cfg.grids.end())
        throw mkoc::Error(mkoc::ErrorCode::InvalidArgument,
                          "classifier '" + name +
                              "' is neither registered nor configured");
  }
  return cfg;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct mkoc_model {
  mkoc::ModelBundle bundle;
};

namespace {

const mkoc::TrainedLayer* layer_at(const mkoc_model* model, int32_t layer) {
  if (model == nullptr || layer < 0) return nullptr;
  const mkoc::MkocModel& m = model->bundle.model;
  const auto n = static_cast<int32_t>(m.encoders.size());
  if (layer < n) return &m.encoders[static_cast<std::size_t>(layer)];
  if (layer == n) return &m.head;
  return nullptr;
}

}  // namespace

extern "C" {

const char* mkoc_version(void) { return "1.0.0"; }

const char* mkoc_last_error(void) { return g_last_error.c_str(); }

void mkoc_fit_options_init(mkoc_fit_options* options) {
  if (options == nullptr) return;
  options->depth = 1;
  options->graph = MKOC_GRAPH_ZERO;
  options->knn_k = 10;
  options->lle_reg = 1e-3;
  options->cda_clusters = 2;
  options->c = 1.0;
  options->lambda = 1.0;
  options->threshold = MKOC_THRESHOLD_THETA1;
  options->eta = 0.05;
  options->r = 1.0;
  options->seed = 0;
}

mkoc_status mkoc_fit(const double* data, int64_t rows, int64_t cols,
                     const mkoc_fit_options* options, mkoc_model** out_model) {
  if (data == nullptr || options == nullptr || out_model == nullptr)
    return fail(MKOC_ERR_INVALID_ARGUMENT, "null argument to mkoc_fit");
  *out_model = nullptr;
  return guarded([&] {
    mkoc::MkocConfig cfg;
    cfg.depth = options->depth;
    cfg.graph.kind = static_cast<mkoc::GraphKind>(options->graph);
    cfg.graph.knn_k = options->knn_k;
    cfg.graph.lle_reg = options->lle_reg;
    cfg.graph.cda_clusters = options->cda_clusters;
    cfg.layers = {mkoc::LayerHyperparams{options->c, options->lambda}};
    cfg.threshold = static_cast<mkoc::ThresholdKind>(options->threshold);
    cfg.eta = options->eta;
    cfg.r = options->r;
    cfg.seed = options->seed;
    mkoc::ModelBundle bundle;
    bundle.model = mkoc::fit(map_rows(data, rows, cols), cfg);
    *out_model = new mkoc_model{std::move(bundle)};
  });
}

mkoc_status mkoc_predict(const mkoc_model* model, const double* data,
                         int64_t rows, int64_t cols, double* out_scores,
                         int32_t* out_labels) {
  if (model == nullptr || (data == nullptr && rows > 0))
    return fail(MKOC_ERR_INVALID_ARGUMENT, "null argument to mkoc_predict");
  return guarded([&] {
    const mkoc::Matrix x = rows > 0 ? map_rows(data, rows, cols)
                                    : mkoc::Matrix(0, cols);
    const std::vector<mkoc::Verdict> verdicts =
        mkoc::bundle_predict(model->bundle, x);
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
      if (out_scores != nullptr) out_scores[i] = verdicts[i].score;
      if (out_labels != nullptr)
        out_labels[i] = verdicts[i].label == mkoc::Label::Target
                            ? MKOC_LABEL_TARGET
                            : MKOC_LABEL_OUTLIER;
    }
  });
}

mkoc_status mkoc_model_save(const mkoc_model* model, const char* path) {
  if (model == nullptr || path == nullptr)
    return fail(MKOC_ERR_INVALID_ARGUMENT, "null argument to mkoc_model_save");
  return guarded([&] { mkoc::save_model(model->bundle, path); });
}

mkoc_status mkoc_model_load(const char* path, mkoc_model** out_model) {
  if (path == nullptr || out_model == nullptr)
    return fail(MKOC_ERR_INVALID_ARGUMENT, "null argument to mkoc_model_load");
  *out_model = nullptr;
  return guarded([&] {
    *out_model = new mkoc_model{mkoc::load_model(path)};
  });
}

void mkoc_model_free(mkoc_model* model) { delete model; }

int32_t mkoc_model_depth(const mkoc_model* model) {
  if (model == nullptr) return 0;
  return static_cast<int32_t>(model->bundle.model.encoders.size() + 1);
}

double mkoc_model_threshold(const mkoc_model* model) {
  return model == nullptr ? 0.0 : model->bundle.model.threshold;
}

mkoc_threshold_kind mkoc_model_threshold_kind(const mkoc_model* model) {
  if (model == nullptr) return MKOC_THRESHOLD_THETA1;
  return static_cast<mkoc_threshold_kind>(model->bundle.model.threshold_kind);
}

double mkoc_model_train_output_mean(const mkoc_model* model) {
  return model == nullptr ? 0.0 : model->bundle.model.train_output_mean;
}

mkoc_status mkoc_model_layer_sigma(const mkoc_model* model, int32_t layer,
                                   double* out_sigma) {
  const mkoc::TrainedLayer* l = layer_at(model, layer);
  if (l == nullptr || out_sigma == nullptr)
    return fail(MKOC_ERR_INVALID_ARGUMENT, "bad layer index");
  *out_sigma = l->sigma;
  return MKOC_OK;
}

mkoc_status mkoc_model_layer_residual(const mkoc_model* model, int32_t layer,
                                      double* out_residual) {
  const mkoc::TrainedLayer* l = layer_at(model, layer);
  if (l == nullptr || out_residual == nullptr)
    return fail(MKOC_ERR_INVALID_ARGUMENT, "bad layer index");
  *out_residual = l->residual;
  return MKOC_OK;
}

void mkoc_run_overrides_init(mkoc_run_overrides* overrides) {
  if (overrides == nullptr) return;
  overrides->folds = -1;
  overrides->runs = -1;
  overrides->jobs = -1;
  overrides->seed = -1;
  overrides->classifiers = nullptr;
  overrides->output_dir = nullptr;
}

mkoc_status mkoc_run_fit(const char* config_path, const char* task,
                         const char* classifier,
                         const mkoc_run_overrides* overrides,
                         const char* model_path, char** out_report) {
  if (config_path == nullptr || task == nullptr || classifier == nullptr ||
      model_path == nullptr)
    return fail(MKOC_ERR_INVALID_ARGUMENT, "null argument to mkoc_run_fit");
  if (out_report != nullptr) *out_report = nullptr;
  return guarded([&] {
    const mkoc::RunConfig cfg = config_with_overrides(config_path, overrides);
    mkoc::TaskFitResult result = mkoc::fit_task(cfg, task, classifier);
    mkoc::save_model(result.bundle, model_path);
    if (out_report != nullptr) *out_report = dup_string(result.report);
  });
}

mkoc_status mkoc_run_predict(const char* model_path, const char* input_csv,
                             char delimiter, int32_t header,
                             int32_t label_column, const char* out_csv) {
  if (model_path == nullptr || input_csv == nullptr || out_csv == nullptr)
    return fail(MKOC_ERR_INVALID_ARGUMENT, "null argument to mkoc_run_predict");
  return guarded([&] {
    const mkoc::ModelBundle bundle = mkoc::load_model(model_path);
    mkoc::CsvSchema schema;
    schema.delimiter = delimiter;
    schema.header = header != 0;
    schema.label_column = label_column;
    const mkoc::Matrix x = mkoc::load_feature_csv(input_csv, schema);
    const std::vector<mkoc::Verdict> verdicts =
        x.rows() > 0 ? mkoc::bundle_predict(bundle, x)
                     : std::vector<mkoc::Verdict>{};
    std::ofstream out(out_csv, std::ios::trunc);
    if (!out)
      throw mkoc::Error(mkoc::ErrorCode::Io,
                        std::string("cannot write '") + out_csv + "'");
    out << "row_index,score,label\n";
    char buf[64];
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.10g,", i, verdicts[i].score);
      out << buf
          << (verdicts[i].label == mkoc::Label::Target ? "TARGET" : "OUTLIER")
          << "\n";
    }
  });
}

mkoc_status mkoc_run_benchmark(const char* config_path,
                               const mkoc_run_overrides* overrides) {
  if (config_path == nullptr)
    return fail(MKOC_ERR_INVALID_ARGUMENT, "null config path");
  return guarded([&] {
    mkoc::RunConfig cfg = config_with_overrides(config_path, overrides);
    if (cfg.output_dir.empty())
      throw mkoc::Error(mkoc::ErrorCode::InvalidArgument,
                        "benchmark needs an output directory");
    mkoc::run_benchmark(cfg);
  });
}

mkoc_status mkoc_run_stats(const char* table_csv, const char* out_dir,
                           char** out_report) {
  if (table_csv == nullptr)
    return fail(MKOC_ERR_INVALID_ARGUMENT, "null table path");
  if (out_report != nullptr) *out_report = nullptr;
  return guarded([&] {
    const mkoc::StatsReport report = mkoc::stats_from_table_file(table_csv);
    if (out_dir != nullptr) mkoc::write_stats_files(report, out_dir);
    if (out_report != nullptr)
      *out_report = dup_string(mkoc::format_stats_text(report));
  });
}

void mkoc_string_free(char* s) { delete[] s; }

}  // extern "C"
