#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mkoc/evaluation.hpp"
#include "mkoc/model.hpp"
#include "mkoc/model_io.hpp"
#include "test_util.hpp"

using mkoc::Index;
using mkoc::Matrix;
using mkoc::Vector;

namespace {

mkoc::MkocConfig basic_config(mkoc::GraphKind kind, int depth,
                              mkoc::ThresholdKind threshold) {
  mkoc::MkocConfig cfg;
  cfg.depth = depth;
  cfg.graph.kind = kind;
  cfg.graph.knn_k = 5;
  cfg.graph.cda_clusters = 2;
  cfg.layers = {mkoc::LayerHyperparams{2.0, 1.0}};
  cfg.threshold = threshold;
  cfg.eta = 0.05;
  cfg.r = 1.0;
  cfg.seed = 9;
  return cfg;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("theta1 threshold arithmetic") {
  SUBCASE("zero deviations give a zero threshold") {
    const Vector o = Vector::Constant(8, 1.0);
    CHECK(mkoc::fit_threshold_theta1(o, 1.0, 0.05) == 0.0);
  }
  SUBCASE("eta*N below one clamps to the largest deviation") {
    Vector o(20);
    for (Index i = 0; i < 20; ++i) o[i] = 1.0 - 0.01 * static_cast<double>(i);
    // deviations 0 .. 0.19, floor(0.05*20) = 1 -> largest deviation
    CHECK(mkoc::fit_threshold_theta1(o, 1.0, 0.05) ==
          doctest::Approx(0.19).epsilon(1e-12));
  }
  SUBCASE("N=100 picks the 5th largest deviation") {
    std::mt19937_64 rng(71);
    Vector o(100);
    for (Index i = 0; i < 100; ++i) o[i] = mkoc::rng_unit(rng);
    const double got = mkoc::fit_threshold_theta1(o, 1.0, 0.05);
    // brute-force oracle
    std::vector<double> dev;
    for (Index i = 0; i < 100; ++i) dev.push_back(std::abs(o[i] - 1.0));
    std::sort(dev.begin(), dev.end(), std::greater<double>());
    CHECK(got == dev[4]);
  }
  SUBCASE("eta=1 keeps the smallest deviation") {
    Vector o(4);
    o << 0.9, 0.8, 0.7, 0.99;
    CHECK(mkoc::fit_threshold_theta1(o, 1.0, 1.0) ==
          doctest::Approx(0.01).epsilon(1e-12));
  }
  CHECK_THROWS_AS(mkoc::fit_threshold_theta1(Vector(), 1.0, 0.05), mkoc::Error);
  CHECK_THROWS_AS(mkoc::fit_threshold_theta1(Vector::Ones(3), 1.0, 0.0),
                  mkoc::Error);
  CHECK_THROWS_AS(mkoc::fit_threshold_theta1(Vector::Ones(3), 1.0, 1.5),
                  mkoc::Error);
}

TEST_CASE("theta2 threshold arithmetic") {
  CHECK(mkoc::fit_threshold_theta2(Vector::Ones(10), 0.05) ==
        doctest::Approx(0.05).epsilon(1e-14));
  CHECK(mkoc::fit_threshold_theta2(Vector::Ones(10), 1.0) == 1.0);
  CHECK(mkoc::fit_threshold_theta2(Vector::Zero(5), 0.05) == 0.0);
  // negative mean: absolute value
  CHECK(mkoc::fit_threshold_theta2(Vector::Constant(4, -2.0), 0.5) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(mkoc::fit_threshold_theta2(Vector(), 0.05), mkoc::Error);
}

TEST_CASE("single-layer zero-graph model matches a hand-rolled ridge oracle") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 10; ++rep) {
    const Index n = 5 + static_cast<Index>(mkoc::rng_bounded(rng, 11));
    const Matrix x = mkoc_test::random_matrix(rng, n, 2);
    mkoc::MkocConfig cfg =
        basic_config(mkoc::GraphKind::Zero, 1, mkoc::ThresholdKind::Theta1);
    const mkoc::MkocModel model = mkoc::fit(x, cfg);

    // oracle via explicit inverse, independent of the solver path
    const double sigma = mkoc::mean_distance_sigma(x);
    const mkoc::KernelMatrix k = mkoc::rbf_kernel(x, sigma);
    Matrix a = k.gram;
    a.diagonal().array() += cfg.layers[0].lambda / cfg.layers[0].c;
    const Vector w = a.inverse() * Vector::Constant(n, cfg.r);
    const Vector o = k.gram * w;
    std::vector<double> dev;
    for (Index i = 0; i < n; ++i) dev.push_back(std::abs(o[i] - cfg.r));
    std::sort(dev.begin(), dev.end(), std::greater<double>());
    const double theta = dev[0];  // floor(0.05 n) < 1 for n <= 15

    CHECK(model.threshold == doctest::Approx(theta).epsilon(1e-9));
    CHECK((model.head.weights.col(0) - w).cwiseAbs().maxCoeff() <= 1e-9);

    const Matrix probes = mkoc_test::random_matrix(rng, 6, 2, -0.5, 1.5);
    const Vector o_p = mkoc::rbf_kernel(probes, x, sigma) * w;
    const std::vector<mkoc::Verdict> verdicts = mkoc::predict(model, probes);
    for (Index i = 0; i < 6; ++i) {
      const double d_hat = std::abs(o_p[i] - cfg.r);
      CHECK(verdicts[static_cast<std::size_t>(i)].score ==
            doctest::Approx(d_hat).epsilon(1e-9));
      CHECK((verdicts[static_cast<std::size_t>(i)].label ==
             mkoc::Label::Target) == (d_hat <= theta));
    }
  }
}

TEST_CASE("deep models keep the residual bound on every layer") {
  std::mt19937_64 rng(79);
  const Matrix x = mkoc_test::blob(rng, 20, 2, 0.5, 0.4);
  for (mkoc::GraphKind kind : {mkoc::GraphKind::Lle, mkoc::GraphKind::Cda}) {
    const mkoc::MkocModel model =
        mkoc::fit(x, basic_config(kind, 3, mkoc::ThresholdKind::Theta1));
    REQUIRE(model.encoders.size() == 2);
    for (const mkoc::TrainedLayer& l : model.encoders) CHECK(l.residual <= 1e-8);
    CHECK(model.head.residual <= 1e-8);
  }
}

TEST_CASE("depth-1 LLE model is the single-layer specialization") {
  std::mt19937_64 rng(83);
  const Matrix x = mkoc_test::blob(rng, 12, 2, 0.0, 0.5);
  const mkoc::MkocModel model =
      mkoc::fit(x, basic_config(mkoc::GraphKind::Lle, 1, mkoc::ThresholdKind::Theta1));
  CHECK(model.encoders.empty());
  CHECK(model.head.recipe.kind == mkoc::GraphKind::Lle);
}

TEST_CASE("predicting the training set with theta1 and small eta accepts everything") {
  std::mt19937_64 rng(89);
  const Matrix x = mkoc_test::blob(rng, 20, 2, 0.0, 0.6);
  const mkoc::MkocModel model = mkoc::fit(
      x, basic_config(mkoc::GraphKind::LdaCentering, 1, mkoc::ThresholdKind::Theta1));
  for (const mkoc::Verdict& v : mkoc::predict(model, x))
    CHECK(v.label == mkoc::Label::Target);
}

TEST_CASE("a training sample scoring exactly the threshold stays a target") {
  std::mt19937_64 rng(97);
  const Matrix x = mkoc_test::blob(rng, 20, 2, 0.0, 0.6);
  const mkoc::MkocModel model = mkoc::fit(
      x, basic_config(mkoc::GraphKind::Zero, 1, mkoc::ThresholdKind::Theta1));
  const std::vector<mkoc::Verdict> verdicts = mkoc::predict(model, x);
  bool hit_boundary = false;
  for (const mkoc::Verdict& v : verdicts)
    if (v.score == model.threshold) {
      hit_boundary = true;
      CHECK(v.label == mkoc::Label::Target);
    }
  CHECK(hit_boundary);  // theta1 is one of the training deviations
}

TEST_CASE("raising the threshold never flips a target to an outlier") {
  std::mt19937_64 rng(101);
  const Matrix x = mkoc_test::blob(rng, 15, 2, 0.0, 0.5);
  const mkoc::MkocModel model = mkoc::fit(
      x, basic_config(mkoc::GraphKind::Zero, 1, mkoc::ThresholdKind::Theta2));
  const Matrix probes = mkoc_test::random_matrix(rng, 40, 2, -1.0, 1.0);
  const std::vector<mkoc::Verdict> base = mkoc::predict(model, probes);
  mkoc::MkocModel looser = model;
  for (double bump : {1e-6, 0.01, 0.5}) {
    looser.threshold = model.threshold + bump;
    const std::vector<mkoc::Verdict> wide = mkoc::predict(looser, probes);
    for (std::size_t i = 0; i < base.size(); ++i)
      if (base[i].label == mkoc::Label::Target)
        CHECK(wide[i].label == mkoc::Label::Target);
  }
}

TEST_CASE("theta1 training rejection rate respects the eta bound") {
  std::mt19937_64 rng(103);
  for (int rep = 0; rep < 6; ++rep) {
    const Index n = 10 + static_cast<Index>(mkoc::rng_bounded(rng, 50));
    const Matrix x = mkoc_test::blob(rng, n, 2, 0.0, 0.7);
    mkoc::MkocConfig cfg =
        basic_config(mkoc::GraphKind::Zero, 1, mkoc::ThresholdKind::Theta1);
    cfg.eta = 0.2;
    const mkoc::MkocModel model = mkoc::fit(x, cfg);
    long rejected = 0;
    for (const mkoc::Verdict& v : mkoc::predict(model, x))
      if (v.label == mkoc::Label::Outlier) ++rejected;
    const long quota = static_cast<long>(std::floor(cfg.eta * static_cast<double>(n)));
    CHECK(rejected <= quota);  // the rank-quota sample itself stays accepted
    if (quota >= 2) CHECK(rejected >= 1);
  }
}

TEST_CASE("predict is bitwise reproducible") {
  std::mt19937_64 rng(107);
  const Matrix x = mkoc_test::blob(rng, 15, 3, 0.0, 0.5);
  const mkoc::MkocModel model = mkoc::fit(
      x, basic_config(mkoc::GraphKind::Cda, 2, mkoc::ThresholdKind::Theta2));
  const Matrix probes = mkoc_test::random_matrix(rng, 10, 3);
  const auto a = mkoc::predict(model, probes);
  const auto b = mkoc::predict(model, probes);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].score == b[i].score);
    CHECK(a[i].label == b[i].label);
  }
}

TEST_CASE("fit validates its configuration") {
  std::mt19937_64 rng(109);
  const Matrix x = mkoc_test::blob(rng, 10, 2, 0.0, 0.5);
  mkoc::MkocConfig cfg =
      basic_config(mkoc::GraphKind::Zero, 0, mkoc::ThresholdKind::Theta1);
  CHECK_THROWS_AS(mkoc::fit(x, cfg), mkoc::Error);
  cfg.depth = 3;
  cfg.layers = {mkoc::LayerHyperparams{}, mkoc::LayerHyperparams{}};
  CHECK_THROWS_AS(mkoc::fit(x, cfg), mkoc::Error);  // 2 entries for 3 layers
  cfg.layers = {mkoc::LayerHyperparams{}};
  cfg.eta = 0.0;
  CHECK_THROWS_AS(mkoc::fit(x, cfg), mkoc::Error);
  CHECK_THROWS_AS(
      mkoc::fit(Matrix::Zero(1, 2),
                basic_config(mkoc::GraphKind::Zero, 1, mkoc::ThresholdKind::Theta1)),
      mkoc::Error);
}

TEST_CASE("layer errors carry the offending layer index") {
  // duplicate rows make sigma degenerate at the first layer
  Matrix x = Matrix::Ones(6, 2);
  try {
    mkoc::fit(x, basic_config(mkoc::GraphKind::Zero, 2, mkoc::ThresholdKind::Theta1));
    FAIL("expected a degenerate-data error");
  } catch (const mkoc::Error& e) {
    CHECK(e.code() == mkoc::ErrorCode::DegenerateData);
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
}

TEST_CASE("model bundles round-trip bit-exactly through the file format") {
  std::mt19937_64 rng(113);
  const Matrix x = mkoc_test::blob(rng, 14, 3, 0.0, 0.5);
  mkoc::ModelBundle bundle;
  bundle.model = mkoc::fit(
      x, basic_config(mkoc::GraphKind::Lle, 2, mkoc::ThresholdKind::Theta2));
  bundle.scaler = mkoc::MinMaxScaler::fit(x);

  const std::string p1 = temp_path("mkoc_model_a.bin");
  const std::string p2 = temp_path("mkoc_model_b.bin");
  mkoc::save_model(bundle, p1);
  const mkoc::ModelBundle loaded = mkoc::load_model(p1);
  mkoc::save_model(loaded, p2);
  CHECK(file_bytes(p1) == file_bytes(p2));

  const Matrix probes = mkoc_test::random_matrix(rng, 8, 3);
  const auto a = mkoc::bundle_predict(bundle, probes);
  const auto b = mkoc::bundle_predict(loaded, probes);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].score == b[i].score);
    CHECK(a[i].label == b[i].label);
  }
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("model loader rejects foreign files") {
  const std::string p = temp_path("mkoc_not_a_model.bin");
  std::ofstream(p) << "definitely not a model";
  CHECK_THROWS_AS(mkoc::load_model(p), mkoc::Error);
  CHECK_THROWS_AS(mkoc::load_model(temp_path("mkoc_missing.bin")), mkoc::Error);
  std::filesystem::remove(p);
}
