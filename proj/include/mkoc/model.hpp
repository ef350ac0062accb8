#ifndef MKOC_MODEL_HPP
#define MKOC_MODEL_HPP

#include <vector>

#include "mkoc/layers.hpp"
#include "mkoc/types.hpp"

namespace mkoc {

enum class ThresholdKind : int {
  Theta1 = 1,  // eta-quantile of training deviations from r
  Theta2 = 2,  // eta fraction of the mean training output
};

enum class Label : int { Target = 0, Outlier = 1 };

struct Verdict {
  double score;  // deviation d-hat; Target iff score <= threshold
  Label label;
};

struct MkocConfig {
  int depth = 1;  // total layers; depth-1 auto-encoders plus the head
  GraphRecipe graph;
  // one entry shared by every layer, or exactly `depth` entries
  std::vector<LayerHyperparams> layers{LayerHyperparams{}};
  ThresholdKind threshold = ThresholdKind::Theta1;
  double eta = 0.05;
  double r = 1.0;
  std::uint64_t seed = 0;
};

struct MkocModel {
  std::vector<TrainedLayer> encoders;
  TrainedLayer head;
  ThresholdKind threshold_kind = ThresholdKind::Theta1;
  double threshold = 0.0;
  double train_output_mean = 0.0;
  double r = 1.0;
  double eta = 0.05;
};

// theta1: deviations |o_i - r| sorted descending; the floor(eta*N)-th one
// (1-based, clamped to >= 1) becomes the threshold.
double fit_threshold_theta1(const Vector& o_hat, double r, double eta);

// theta2: eta * mean(o_hat), in absolute value.
double fit_threshold_theta2(const Vector& o_hat, double eta);

// Stack depth-1 auto-encoders, fit the one-class head on the last
// representation, then fit the threshold on the training outputs.
MkocModel fit(const Matrix& x, const MkocConfig& cfg);

// Raw head outputs for new samples, after passing through every encoder.
Vector model_output(const MkocModel& model, const Matrix& x);

// Deviation scores: |o - r| under theta1, |o - mean(train output)| under
// theta2.
Vector decision_scores(const MkocModel& model, const Matrix& x);

std::vector<Verdict> predict(const MkocModel& model, const Matrix& x);

}  // namespace mkoc

#endif
