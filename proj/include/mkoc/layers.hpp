#ifndef MKOC_LAYERS_HPP
#define MKOC_LAYERS_HPP

#include "mkoc/graph.hpp"
#include "mkoc/kernel.hpp"
#include "mkoc/types.hpp"

namespace mkoc {

struct LayerHyperparams {
  double c = 1.0;       // error-term regularizer C > 0
  double lambda = 1.0;  // graph regularizer lambda >= 0
};

// One solved layer: enough state to kernelize and score unseen samples.
struct TrainedLayer {
  Matrix train_inputs;  // snapshot of the layer's input representation
  double sigma = 0.0;
  Matrix weights;       // N x m solution of the layer system
  GraphRecipe recipe;
  LayerHyperparams hp;
  double residual = 0.0;  // relative Frobenius residual of the solve
};

struct SolveResult {
  Matrix weights;
  double residual;
};

// Dense solve of (K + (1/C) L K + (lambda/C) I) W = targets by partially
// pivoted LU; the system is nonsymmetric whenever L is nonzero. Errors out
// on an estimated condition number above 1e12 or a residual above 1e-8.
SolveResult solve_layer(const KernelMatrix& k, const LaplacianMatrix& lap,
                        const Matrix& targets, const LayerHyperparams& hp);

struct LayerFit {
  TrainedLayer layer;
  Matrix output;  // K * W: the layer's representation of its own inputs
};

// Auto-encoder layer: targets are the inputs themselves.
LayerFit fit_autoencoder_layer(const Matrix& x_prev, const LayerHyperparams& hp,
                               const GraphRecipe& recipe);

// One-class head: targets are the constant column r * 1.
LayerFit fit_oneclass_layer(const Matrix& x_prev, double r,
                            const LayerHyperparams& hp,
                            const GraphRecipe& recipe);

// Kernelize x_new against the layer's training snapshot and apply W.
// On the training inputs this reproduces the fit-time output bitwise.
Matrix transform(const TrainedLayer& layer, const Matrix& x_new);

}  // namespace mkoc

#endif
