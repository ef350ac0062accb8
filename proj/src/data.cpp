#include "mkoc/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "mkoc/random.hpp"

namespace mkoc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delim)) fields.push_back(trim(field));
  if (!line.empty() && line.back() == delim) fields.push_back("");
  return fields;
}

double parse_number(const std::string& token, const std::string& path,
                    std::size_t line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != token.size() || token.empty() || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << path << ":" << line_no << ": non-numeric feature value '" << token
        << "'";
    throw Error(ErrorCode::Parse, msg.str());
  }
  return v;
}

struct RawRows {
  std::vector<std::vector<double>> features;
  std::vector<std::string> labels;  // empty when schema has no label column
};

RawRows read_rows(const std::string& path, const CsvSchema& schema,
                  bool allow_empty = false) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");

  RawRows rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t n_cols = 0;
  bool skipped_header = !schema.header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    std::vector<std::string> fields = split(stripped, schema.delimiter);
    if (schema.label_column >= 0 &&
        static_cast<std::size_t>(schema.label_column) >= fields.size()) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": label column " << schema.label_column
          << " missing (row has " << fields.size() << " fields)";
      throw Error(ErrorCode::Parse, msg.str());
    }
    std::vector<double> feat;
    feat.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (schema.label_column >= 0 &&
          c == static_cast<std::size_t>(schema.label_column)) {
        rows.labels.push_back(fields[c]);
        continue;
      }
      feat.push_back(parse_number(fields[c], path, line_no));
    }
    if (n_cols == 0) {
      n_cols = feat.size();
    } else if (feat.size() != n_cols) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected " << n_cols
          << " feature fields, got " << feat.size();
      throw Error(ErrorCode::Parse, msg.str());
    }
    rows.features.push_back(std::move(feat));
  }
  if (rows.features.empty() && !allow_empty)
    throw Error(ErrorCode::Parse, path + ": no data rows");
  return rows;
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

Matrix take_rows(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Index>(i)) = m.row(idx[i]);
  return out;
}

char parse_delimiter(const std::string& token, const std::string& path) {
  if (token == "comma") return ',';
  if (token == "semicolon") return ';';
  if (token == "tab") return '\t';
  if (token == "space") return ' ';
  if (token.size() == 1) return token[0];
  throw Error(ErrorCode::Parse,
              path + ": unknown delimiter token '" + token + "'");
}

}  // namespace

LabeledDataset load_csv(const std::string& path, const CsvSchema& schema,
                        const std::string& name) {
  if (schema.label_column < 0)
    throw Error(ErrorCode::InvalidArgument,
                "labeled dataset needs a label column");
  RawRows rows = read_rows(path, schema);

  std::map<std::string, int> ids;  // lexicographic by construction
  for (const std::string& l : rows.labels) ids.emplace(l, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;

  LabeledDataset ds;
  ds.name = name.empty() ? std::filesystem::path(path).stem().string() : name;
  ds.features = to_matrix(rows.features);
  ds.labels.reserve(rows.labels.size());
  for (const std::string& l : rows.labels) ds.labels.push_back(ids.at(l));
  ds.class_names.resize(ids.size());
  for (const auto& [label, id] : ids)
    ds.class_names[static_cast<std::size_t>(id)] = label;
  return ds;
}

Matrix load_feature_csv(const std::string& path, const CsvSchema& schema) {
  // a label column, when configured, is parsed and dropped; scoring an
  // empty file is legal: zero rows in, zero verdicts out
  return to_matrix(read_rows(path, schema, /*allow_empty=*/true).features);
}

std::vector<OneClassTask> make_oneclass_tasks(const LabeledDataset& ds) {
  const int n_classes = static_cast<int>(ds.class_names.size());
  if (n_classes < 2)
    throw Error(ErrorCode::InvalidArgument,
                "one-class task construction needs at least 2 classes, '" +
                    ds.name + "' has " + std::to_string(n_classes));

  std::vector<OneClassTask> tasks;
  tasks.reserve(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) {
    std::vector<int> target_idx;
    std::vector<int> outlier_idx;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
      (ds.labels[i] == c ? target_idx : outlier_idx)
          .push_back(static_cast<int>(i));
    OneClassTask task;
    task.name = ds.name + "(" + std::to_string(c + 1) + ")";
    task.targets = take_rows(ds.features, target_idx);
    task.outliers = take_rows(ds.features, outlier_idx);
    tasks.push_back(std::move(task));
  }
  return tasks;
}

MinMaxScaler MinMaxScaler::fit(const Matrix& train) {
  if (train.rows() < 1)
    throw Error(ErrorCode::InvalidArgument, "cannot fit scaler on empty data");
  MinMaxScaler s;
  s.col_min = train.colwise().minCoeff();
  s.col_max = train.colwise().maxCoeff();
  return s;
}

Matrix MinMaxScaler::apply(const Matrix& x) const {
  if (x.cols() != col_min.cols())
    throw Error(ErrorCode::DimensionMismatch,
                "scaler fitted on " + std::to_string(col_min.cols()) +
                    " columns, input has " + std::to_string(x.cols()));
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double range = col_max[j] - col_min[j];
    if (range > 0.0)
      out.col(j) = (x.col(j).array() - col_min[j]) / range;
    else
      out.col(j).setZero();  // constant training column
  }
  return out;
}

Matrix normalize_minmax(const Matrix& train, const Matrix& apply_to) {
  return MinMaxScaler::fit(train).apply(apply_to);
}

std::vector<FoldSplit> kfold_split(const OneClassTask& task, int k,
                                   std::uint64_t seed) {
  if (k < 2)
    throw Error(ErrorCode::InvalidArgument,
                "k-fold split needs k >= 2, got " + std::to_string(k));
  if (task.targets.rows() < k || task.outliers.rows() < k) {
    std::ostringstream msg;
    msg << "task '" << task.name << "' has too few samples for " << k
        << " folds (" << task.targets.rows() << " targets, "
        << task.outliers.rows() << " outliers)";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }

  auto folds_of = [&](Index n, std::uint32_t stream) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng = make_rng(seed, 0x666f6c64, stream);  // "fold"
    shuffle_indices(idx, rng);
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
    const Index base = n / k;
    const Index rem = n % k;
    std::size_t at = 0;
    for (int f = 0; f < k; ++f) {
      const Index size = base + (f < rem ? 1 : 0);
      for (Index s = 0; s < size; ++s)
        folds[static_cast<std::size_t>(f)].push_back(idx[at++]);
    }
    return folds;
  };

  const std::vector<std::vector<int>> target_folds =
      folds_of(task.targets.rows(), 0);
  const std::vector<std::vector<int>> outlier_folds =
      folds_of(task.outliers.rows(), 1);

  std::vector<FoldSplit> splits;
  splits.reserve(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    FoldSplit split;
    split.index = f;
    std::vector<int> train_idx;
    for (int g = 0; g < k; ++g)
      if (g != f)
        train_idx.insert(train_idx.end(),
                         target_folds[static_cast<std::size_t>(g)].begin(),
                         target_folds[static_cast<std::size_t>(g)].end());
    split.train_targets = take_rows(task.targets, train_idx);
    split.test_targets =
        take_rows(task.targets, target_folds[static_cast<std::size_t>(f)]);
    split.test_outliers =
        take_rows(task.outliers, outlier_folds[static_cast<std::size_t>(f)]);
    splits.push_back(std::move(split));
  }
  return splits;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open manifest '" + path + "'");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::istringstream fields(stripped);
    ManifestEntry entry;
    std::string label_col, delim, flag;
    if (!(fields >> entry.name >> entry.path >> label_col >> delim)) {
      std::ostringstream msg;
      msg << path << ":" << line_no
          << ": expected 'name path label_column delimiter [header]'";
      throw Error(ErrorCode::Parse, msg.str());
    }
    try {
      entry.schema.label_column = std::stoi(label_col);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, path + ":" + std::to_string(line_no) +
                                        ": bad label column '" + label_col + "'");
    }
    entry.schema.delimiter = parse_delimiter(delim, path);
    if (fields >> flag) {
      if (flag != "header")
        throw Error(ErrorCode::Parse, path + ":" + std::to_string(line_no) +
                                          ": unknown flag '" + flag + "'");
      entry.schema.header = true;
    }
    std::filesystem::path p(entry.path);
    if (p.is_relative()) entry.path = (base / p).string();
    entries.push_back(std::move(entry));
  }
  if (entries.empty())
    throw Error(ErrorCode::Parse, path + ": manifest lists no datasets");
  return entries;
}

}  // namespace mkoc
