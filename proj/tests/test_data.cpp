#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "mkoc/data.hpp"
#include "test_util.hpp"

using mkoc::Index;
using mkoc::Matrix;

namespace {

std::string write_temp(const char* name, const std::string& contents) {
  const std::string path =
      (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path, std::ios::trunc);
  out << contents;
  return path;
}

const char* kIrisPath = MKOC_DATA_DIR "/iris.csv";

}  // namespace

TEST_CASE("load_csv reads the iris file") {
  mkoc::CsvSchema schema;
  schema.label_column = 4;
  schema.header = true;
  const mkoc::LabeledDataset ds = mkoc::load_csv(kIrisPath, schema, "iris");
  CHECK(ds.features.rows() == 150);
  CHECK(ds.features.cols() == 4);
  CHECK(ds.class_names.size() == 3);
  // lexicographic ids
  CHECK(ds.class_names[0] == "setosa");
  CHECK(ds.class_names[1] == "versicolor");
  CHECK(ds.class_names[2] == "virginica");
  CHECK(ds.labels.front() == 0);
  CHECK(ds.labels.back() == 2);
}

TEST_CASE("load_csv error paths") {
  mkoc::CsvSchema schema;
  schema.label_column = 1;

  const std::string empty = write_temp("mkoc_empty.csv", "");
  CHECK_THROWS_AS(mkoc::load_csv(empty, schema), mkoc::Error);

  const std::string bad_number =
      write_temp("mkoc_badnum.csv", "1.0,a\n2.x,b\n");
  CHECK_THROWS_WITH_AS(mkoc::load_csv(bad_number, schema),
                       doctest::Contains(":2:"), mkoc::Error);

  const std::string short_row = write_temp("mkoc_shortrow.csv", "1.0,a\n2.0\n");
  CHECK_THROWS_WITH_AS(mkoc::load_csv(short_row, schema),
                       doctest::Contains("label column"), mkoc::Error);

  const std::string ragged = write_temp("mkoc_ragged.csv", "1,2,a\n1,b\n");
  CHECK_THROWS_AS(mkoc::load_csv(ragged, {2, ',', false}), mkoc::Error);

  CHECK_THROWS_AS(mkoc::load_csv("/nonexistent/file.csv", schema), mkoc::Error);

  std::filesystem::remove(empty);
  std::filesystem::remove(bad_number);
  std::filesystem::remove(short_row);
  std::filesystem::remove(ragged);
}

TEST_CASE("header rows are skipped only when requested") {
  const std::string path = write_temp("mkoc_header.csv", "f,label\n1.5,a\n2.5,b\n");
  mkoc::CsvSchema schema;
  schema.label_column = 1;
  schema.header = true;
  const mkoc::LabeledDataset ds = mkoc::load_csv(path, schema);
  CHECK(ds.features.rows() == 2);
  CHECK(ds.features(0, 0) == 1.5);
  std::filesystem::remove(path);
}

TEST_CASE("make_oneclass_tasks splits iris into three 50/100 tasks") {
  mkoc::CsvSchema schema;
  schema.label_column = 4;
  schema.header = true;
  const mkoc::LabeledDataset ds = mkoc::load_csv(kIrisPath, schema, "iris");
  const std::vector<mkoc::OneClassTask> tasks = mkoc::make_oneclass_tasks(ds);
  REQUIRE(tasks.size() == 3);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(tasks[c].name == "iris(" + std::to_string(c + 1) + ")");
    CHECK(tasks[c].targets.rows() == 50);
    CHECK(tasks[c].outliers.rows() == 100);
  }
}

TEST_CASE("make_oneclass_tasks on a binary dataset yields two mirrored tasks") {
  const std::string path =
      write_temp("mkoc_binary.csv", "1,x\n2,x\n3,x\n4,y\n5,y\n");
  const mkoc::LabeledDataset ds = mkoc::load_csv(path, {1, ',', false}, "bin");
  const auto tasks = mkoc::make_oneclass_tasks(ds);
  REQUIRE(tasks.size() == 2);
  CHECK(tasks[0].targets.rows() == 3);
  CHECK(tasks[0].outliers.rows() == 2);
  CHECK(tasks[1].targets.rows() == 2);
  CHECK(tasks[1].outliers.rows() == 3);
  std::filesystem::remove(path);
}

TEST_CASE("make_oneclass_tasks rejects single-class data") {
  const std::string path = write_temp("mkoc_single.csv", "1,x\n2,x\n");
  const mkoc::LabeledDataset ds = mkoc::load_csv(path, {1, ',', false});
  CHECK_THROWS_AS(mkoc::make_oneclass_tasks(ds), mkoc::Error);
  std::filesystem::remove(path);
}

TEST_CASE("min-max normalization") {
  Matrix train(2, 3);
  train << 0.0, 5.0, 7.0, 10.0, 5.0, 9.0;
  Matrix apply(1, 3);
  apply << 20.0, 5.0, 8.0;
  const Matrix out = mkoc::normalize_minmax(train, apply);
  CHECK(out(0, 0) == 2.0);  // outside the training range, not clipped
  CHECK(out(0, 1) == 0.0);  // constant column
  CHECK(out(0, 2) == 0.5);

  const Matrix self = mkoc::normalize_minmax(train, train);
  CHECK(self.col(0).minCoeff() == 0.0);
  CHECK(self.col(0).maxCoeff() == 1.0);

  // refitting on the same data reproduces identical parameters
  const mkoc::MinMaxScaler s1 = mkoc::MinMaxScaler::fit(train);
  const mkoc::MinMaxScaler s2 = mkoc::MinMaxScaler::fit(train);
  CHECK((s1.col_min - s2.col_min).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s1.col_max - s2.col_max).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kfold_split partitions targets and outliers") {
  // unique values so rows can be traced through the shuffle
  mkoc::OneClassTask task;
  task.name = "toy";
  task.targets.resize(50, 1);
  for (Index i = 0; i < 50; ++i) task.targets(i, 0) = i;
  task.outliers.resize(100, 1);
  for (Index i = 0; i < 100; ++i) task.outliers(i, 0) = 1000 + i;

  const auto folds = mkoc::kfold_split(task, 5, 42);
  REQUIRE(folds.size() == 5);

  std::multiset<double> test_targets, test_outliers;
  for (const mkoc::FoldSplit& f : folds) {
    CHECK(f.train_targets.rows() == 40);
    CHECK(f.test_targets.rows() == 10);
    CHECK(f.test_outliers.rows() == 20);
    for (Index i = 0; i < f.test_targets.rows(); ++i)
      test_targets.insert(f.test_targets(i, 0));
    for (Index i = 0; i < f.test_outliers.rows(); ++i)
      test_outliers.insert(f.test_outliers(i, 0));
    // no outlier value ever shows up in a training fold
    for (Index i = 0; i < f.train_targets.rows(); ++i)
      CHECK(f.train_targets(i, 0) < 1000.0);
    // train and test targets are disjoint within the fold
    std::set<double> train_set;
    for (Index i = 0; i < f.train_targets.rows(); ++i)
      train_set.insert(f.train_targets(i, 0));
    for (Index i = 0; i < f.test_targets.rows(); ++i)
      CHECK(train_set.count(f.test_targets(i, 0)) == 0);
  }
  // every sample tested exactly once
  CHECK(test_targets.size() == 50);
  CHECK(std::set<double>(test_targets.begin(), test_targets.end()).size() == 50);
  CHECK(test_outliers.size() == 100);
  CHECK(std::set<double>(test_outliers.begin(), test_outliers.end()).size() ==
        100);
}

TEST_CASE("kfold_split is deterministic and seed-sensitive") {
  std::mt19937_64 rng(131);
  mkoc::OneClassTask task;
  task.name = "toy";
  task.targets = mkoc_test::random_matrix(rng, 23, 2);
  task.outliers = mkoc_test::random_matrix(rng, 17, 2);

  const auto a = mkoc::kfold_split(task, 5, 7);
  const auto b = mkoc::kfold_split(task, 5, 7);
  const auto c = mkoc::kfold_split(task, 5, 8);
  bool any_diff = false;
  for (std::size_t f = 0; f < a.size(); ++f) {
    CHECK((a[f].train_targets - b[f].train_targets).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a[f].test_outliers - b[f].test_outliers).cwiseAbs().maxCoeff() == 0.0);
    if (a[f].test_targets.rows() == c[f].test_targets.rows() &&
        (a[f].test_targets - c[f].test_targets).cwiseAbs().maxCoeff() != 0.0)
      any_diff = true;
  }
  CHECK(any_diff);  // a different seed reshuffles

  CHECK_THROWS_AS(mkoc::kfold_split(task, 1, 0), mkoc::Error);
  task.outliers = task.outliers.topRows(3);
  CHECK_THROWS_AS(mkoc::kfold_split(task, 5, 0), mkoc::Error);
}

TEST_CASE("manifest parsing resolves paths and delimiters") {
  const std::string dir =
      (std::filesystem::temp_directory_path() / "mkoc_manifest_test").string();
  std::filesystem::create_directories(dir);
  std::ofstream(dir + "/data.csv") << "1,a\n2,b\n";
  const std::string manifest = dir + "/sets.txt";
  std::ofstream(manifest) << "# comment\n"
                          << "toy data.csv 1 comma\n"
                          << "toy2 " << dir << "/data.csv 1 , header\n";

  const auto entries = mkoc::load_manifest(manifest);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].name == "toy");
  CHECK(entries[0].path == dir + "/data.csv");
  CHECK(entries[0].schema.delimiter == ',');
  CHECK(entries[0].schema.header == false);
  CHECK(entries[1].schema.header == true);

  const std::string bad = write_temp("mkoc_bad_manifest.txt", "only two\n");
  CHECK_THROWS_AS(mkoc::load_manifest(bad), mkoc::Error);
  const std::string bad2 =
      write_temp("mkoc_bad_manifest2.txt", "a b notanint comma\n");
  CHECK_THROWS_AS(mkoc::load_manifest(bad2), mkoc::Error);
  const std::string empty_m = write_temp("mkoc_empty_manifest.txt", "# none\n");
  CHECK_THROWS_AS(mkoc::load_manifest(empty_m), mkoc::Error);

  std::filesystem::remove_all(dir);
  std::filesystem::remove(bad);
  std::filesystem::remove(bad2);
  std::filesystem::remove(empty_m);
}
