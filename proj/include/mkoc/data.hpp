#ifndef MKOC_DATA_HPP
#define MKOC_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mkoc/types.hpp"

namespace mkoc {

struct CsvSchema {
  int label_column = -1;  // -1: no label column, all columns are features
  char delimiter = ',';
  bool header = false;
};

struct LabeledDataset {
  std::string name;
  Matrix features;
  std::vector<int> labels;              // dense ids, lexicographic by class name
  std::vector<std::string> class_names;  // id -> original label string
};

// Parse a delimited numeric file. Class strings map to dense integer ids in
// lexicographic order so ids are stable across runs.
LabeledDataset load_csv(const std::string& path, const CsvSchema& schema,
                        const std::string& name = "");

// Feature rows for scoring. A configured label column is dropped; a file
// with no data rows gives an empty matrix instead of an error.
Matrix load_feature_csv(const std::string& path, const CsvSchema& schema);

struct OneClassTask {
  std::string name;  // e.g. "iris(1)"
  Matrix targets;
  Matrix outliers;
};

// One task per class: that class as targets, the union of the rest as
// outliers.
std::vector<OneClassTask> make_oneclass_tasks(const LabeledDataset& ds);

struct MinMaxScaler {
  Eigen::RowVectorXd col_min;
  Eigen::RowVectorXd col_max;

  static MinMaxScaler fit(const Matrix& train);
  // (x - min)/(max - min) per column; constant columns map to 0; values
  // outside the training range are not clipped.
  Matrix apply(const Matrix& x) const;
};

Matrix normalize_minmax(const Matrix& train, const Matrix& apply_to);

struct FoldSplit {
  int index = 0;
  Matrix train_targets;
  Matrix test_targets;
  Matrix test_outliers;
};

// Shuffle targets and outliers by seed, partition each into k near-equal
// folds. Fold i trains on the targets outside fold i and tests on fold-i
// targets plus fold-i outliers, so every outlier is tested exactly once and
// never trained on.
std::vector<FoldSplit> kfold_split(const OneClassTask& task, int k,
                                   std::uint64_t seed);

struct ManifestEntry {
  std::string name;
  std::string path;  // resolved relative to the manifest file
  CsvSchema schema;
};

// One dataset per line: name path label_column delimiter [header].
// The delimiter is a single character or one of comma/semicolon/tab/space.
std::vector<ManifestEntry> load_manifest(const std::string& path);

}  // namespace mkoc

#endif
