/* C API for the mkoc library: graph-embedded multi-layer kernel ridge
 * regression one-class classifiers.
 *
 * All functions return MKOC_OK (0) on success or a nonzero status code;
 * mkoc_last_error() describes the most recent failure on the calling
 * thread. Handles are opaque and freed with their matching *_free call.
 */
#ifndef MKOC_MKOC_H
#define MKOC_MKOC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mkoc_status {
  MKOC_OK = 0,
  MKOC_ERR_INVALID_ARGUMENT = 1,
  MKOC_ERR_DIMENSION_MISMATCH = 2,
  MKOC_ERR_DEGENERATE_DATA = 3,
  MKOC_ERR_SINGULAR_SYSTEM = 4,
  MKOC_ERR_EMPTY_CLUSTER = 5,
  MKOC_ERR_IO = 6,
  MKOC_ERR_PARSE = 7,
  MKOC_ERR_INTERNAL = 8
} mkoc_status;

typedef enum mkoc_graph_kind {
  MKOC_GRAPH_ZERO = 0,
  MKOC_GRAPH_LE_KNN = 1,
  MKOC_GRAPH_LLE = 2,
  MKOC_GRAPH_LDA = 3,
  MKOC_GRAPH_CDA = 4
} mkoc_graph_kind;

typedef enum mkoc_threshold_kind {
  MKOC_THRESHOLD_THETA1 = 1,
  MKOC_THRESHOLD_THETA2 = 2
} mkoc_threshold_kind;

typedef enum mkoc_label { MKOC_LABEL_TARGET = 0, MKOC_LABEL_OUTLIER = 1 } mkoc_label;

typedef struct mkoc_model mkoc_model; /* opaque */

const char* mkoc_version(void);

/* Message for the last failed call on this thread; empty string if none. */
const char* mkoc_last_error(void);

typedef struct mkoc_fit_options {
  int32_t depth;                 /* total layers, >= 1 */
  mkoc_graph_kind graph;
  int32_t knn_k;                 /* LE/LLE neighbors, clamped to N-1 */
  double lle_reg;                /* LLE local Gram regularizer */
  int32_t cda_clusters;
  double c;                      /* error regularizer C > 0 */
  double lambda;                 /* graph regularizer >= 0 */
  mkoc_threshold_kind threshold;
  double eta;                    /* rejection fraction in (0, 1] */
  double r;                      /* regression target */
  uint64_t seed;
} mkoc_fit_options;

/* Fill with the library defaults (depth 1, zero graph, C=1, lambda=1,
 * theta1, eta 0.05, r 1). */
void mkoc_fit_options_init(mkoc_fit_options* options);

/* Train on row-major data (rows x cols, target-class samples only). */
mkoc_status mkoc_fit(const double* data, int64_t rows, int64_t cols,
                     const mkoc_fit_options* options, mkoc_model** out_model);

/* Score row-major data. scores/labels must hold `rows` entries; either may
 * be NULL if not wanted. Models loaded from files fitted through the CLI
 * apply their stored feature scaling first. */
mkoc_status mkoc_predict(const mkoc_model* model, const double* data,
                         int64_t rows, int64_t cols, double* out_scores,
                         int32_t* out_labels);

mkoc_status mkoc_model_save(const mkoc_model* model, const char* path);
mkoc_status mkoc_model_load(const char* path, mkoc_model** out_model);
void mkoc_model_free(mkoc_model* model);

/* Fitted-model accessors. */
int32_t mkoc_model_depth(const mkoc_model* model);
double mkoc_model_threshold(const mkoc_model* model);
mkoc_threshold_kind mkoc_model_threshold_kind(const mkoc_model* model);
double mkoc_model_train_output_mean(const mkoc_model* model);
/* layer 0..depth-1 (the head is the last layer) */
mkoc_status mkoc_model_layer_sigma(const mkoc_model* model, int32_t layer,
                                   double* out_sigma);
mkoc_status mkoc_model_layer_residual(const mkoc_model* model, int32_t layer,
                                      double* out_residual);

/* Optional overrides for the config-file driven runs below; any negative
 * field (or NULL pointer) keeps the config file value. */
typedef struct mkoc_run_overrides {
  int32_t folds;
  int32_t runs;
  int32_t jobs;
  int64_t seed;
  const char* classifiers; /* comma-separated list, NULL keeps config */
  const char* output_dir;  /* NULL keeps config */
} mkoc_run_overrides;

void mkoc_run_overrides_init(mkoc_run_overrides* overrides);

/* Grid-search `classifier` on `task` from the run config's manifest, refit
 * on all target samples, and save the model to model_path. A heap-allocated
 * fit report (threshold, per-layer sigma, residuals) is returned through
 * out_report when non-NULL; free it with mkoc_string_free. */
mkoc_status mkoc_run_fit(const char* config_path, const char* task,
                         const char* classifier,
                         const mkoc_run_overrides* overrides,
                         const char* model_path, char** out_report);

/* Score a feature CSV with a saved model and write
 * row_index,score,label rows to out_csv. label_column >= 0 drops that
 * column from the input first. */
mkoc_status mkoc_run_predict(const char* model_path, const char* input_csv,
                             char delimiter, int32_t header,
                             int32_t label_column, const char* out_csv);

/* Full benchmark: every configured classifier on every manifest task.
 * Writes gmean.csv/gmean.txt, stats.csv/friedman.csv/stats.txt and
 * best_configs.csv under the output directory. Byte-identical for
 * identical config and seed. */
mkoc_status mkoc_run_benchmark(const char* config_path,
                               const mkoc_run_overrides* overrides);

/* Recompute eta_m/eta_p/eta_f and the Friedman/Iman-Davenport statistics
 * from a gmean table CSV. Writes stats files to out_dir when non-NULL;
 * returns the text report through out_report when non-NULL. */
mkoc_status mkoc_run_stats(const char* table_csv, const char* out_dir,
                           char** out_report);

void mkoc_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MKOC_MKOC_H */
