#include "mkoc/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mkoc {

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw Error(ErrorCode::InvalidArgument,
                "eta must lie in (0, 1], got " + std::to_string(eta));
}

LayerHyperparams layer_hp(const MkocConfig& cfg, int layer) {
  if (cfg.layers.size() == 1) return cfg.layers.front();
  return cfg.layers[static_cast<std::size_t>(layer)];
}

}  // namespace

double fit_threshold_theta1(const Vector& o_hat, double r, double eta) {
  check_eta(eta);
  const Index n = o_hat.size();
  if (n < 1)
    throw Error(ErrorCode::InvalidArgument, "empty training output");
  std::vector<double> dev(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) dev[static_cast<std::size_t>(i)] = std::abs(o_hat[i] - r);
  std::stable_sort(dev.begin(), dev.end(), std::greater<double>());
  // 1-based rank floor(eta*N), clamped so eta*N < 1 keeps every sample
  Index rank = static_cast<Index>(std::floor(eta * static_cast<double>(n)));
  rank = std::max<Index>(rank, 1);
  rank = std::min<Index>(rank, n);
  return dev[static_cast<std::size_t>(rank - 1)];
}

double fit_threshold_theta2(const Vector& o_hat, double eta) {
  check_eta(eta);
  if (o_hat.size() < 1)
    throw Error(ErrorCode::InvalidArgument, "empty training output");
  return std::abs(eta * o_hat.mean());
}

MkocModel fit(const Matrix& x, const MkocConfig& cfg) {
  if (cfg.depth < 1)
    throw Error(ErrorCode::InvalidArgument,
                "depth must be >= 1, got " + std::to_string(cfg.depth));
  if (x.rows() < 2)
    throw Error(ErrorCode::InvalidArgument,
                "fit needs at least 2 training samples, got " +
                    std::to_string(x.rows()));
  if (cfg.layers.size() != 1 &&
      cfg.layers.size() != static_cast<std::size_t>(cfg.depth))
    throw Error(ErrorCode::InvalidArgument,
                "hyperparameter list must have 1 or depth entries");
  check_eta(cfg.eta);

  MkocModel model;
  model.threshold_kind = cfg.threshold;
  model.r = cfg.r;
  model.eta = cfg.eta;

  Matrix rep = x;
  for (int h = 0; h < cfg.depth - 1; ++h) {
    GraphRecipe recipe = cfg.graph;
    recipe.seed = cfg.seed + static_cast<std::uint64_t>(h);
    try {
      LayerFit f = fit_autoencoder_layer(rep, layer_hp(cfg, h), recipe);
      model.encoders.push_back(std::move(f.layer));
      rep = std::move(f.output);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "auto-encoder layer " << h + 1 << ": " << e.what();
      throw Error(e.code(), msg.str());
    }
  }

  GraphRecipe head_recipe = cfg.graph;
  head_recipe.seed = cfg.seed + static_cast<std::uint64_t>(cfg.depth - 1);
  Vector o_hat;
  try {
    LayerFit f =
        fit_oneclass_layer(rep, cfg.r, layer_hp(cfg, cfg.depth - 1), head_recipe);
    model.head = std::move(f.layer);
    o_hat = f.output.col(0);
  } catch (const Error& e) {
    std::ostringstream msg;
    msg << "one-class layer " << cfg.depth << ": " << e.what();
    throw Error(e.code(), msg.str());
  }

  model.train_output_mean = o_hat.mean();
  model.threshold = cfg.threshold == ThresholdKind::Theta1
                        ? fit_threshold_theta1(o_hat, cfg.r, cfg.eta)
                        : fit_threshold_theta2(o_hat, cfg.eta);
  return model;
}

Vector model_output(const MkocModel& model, const Matrix& x) {
  Matrix rep = x;
  for (const TrainedLayer& enc : model.encoders) rep = transform(enc, rep);
  return transform(model.head, rep).col(0);
}

Vector decision_scores(const MkocModel& model, const Matrix& x) {
  const Vector o = model_output(model, x);
  const double ref = model.threshold_kind == ThresholdKind::Theta1
                         ? model.r
                         : model.train_output_mean;
  return (o.array() - ref).abs();
}

std::vector<Verdict> predict(const MkocModel& model, const Matrix& x) {
  const Vector scores = decision_scores(model, x);
  std::vector<Verdict> verdicts(static_cast<std::size_t>(scores.size()));
  for (Index i = 0; i < scores.size(); ++i) {
    const bool target = scores[i] <= model.threshold;  // boundary is inclusive
    verdicts[static_cast<std::size_t>(i)] =
        Verdict{scores[i], target ? Label::Target : Label::Outlier};
  }
  return verdicts;
}

}  // namespace mkoc
