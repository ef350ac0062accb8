#include "mkoc/layers.hpp"

#include <sstream>

namespace mkoc {

namespace {

constexpr double kResidualBound = 1e-8;
constexpr double kRcondFloor = 1e-12;  // condition estimate cap 1e12

// K * W with per-entry left-to-right accumulation. Output entry (i, j)
// depends only on kernel row i and weight column j, so a sample scores the
// same bits whether it is kernelized alone or inside a batch; Eigen's
// GEMM/GEMV kernels reorder the sums by batch shape and call site.
[[gnu::noinline]] Matrix layer_output(const Matrix& kernel,
                                      const Matrix& weights) {
  Matrix out(kernel.rows(), weights.cols());
  for (Index i = 0; i < kernel.rows(); ++i)
    for (Index j = 0; j < weights.cols(); ++j) {
      double acc = 0.0;
      for (Index c = 0; c < kernel.cols(); ++c) acc += kernel(i, c) * weights(c, j);
      out(i, j) = acc;
    }
  return out;
}

void check_hyperparams(const LayerHyperparams& hp) {
  if (hp.c <= 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "regularization C must be positive, got " + std::to_string(hp.c));
  if (hp.lambda < 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "graph regularizer lambda must be nonnegative, got " +
                    std::to_string(hp.lambda));
}

LayerFit fit_layer(const Matrix& x_prev, const Matrix& targets,
                   const LayerHyperparams& hp, const GraphRecipe& recipe) {
  if (x_prev.rows() < 2)
    throw Error(ErrorCode::InvalidArgument,
                "layer fit needs at least 2 samples, got " +
                    std::to_string(x_prev.rows()));
  const double sigma = mean_distance_sigma(x_prev);
  const KernelMatrix k = rbf_kernel(x_prev, sigma);
  const LaplacianMatrix lap = build_laplacian(k, recipe);
  SolveResult solved = solve_layer(k, lap, targets, hp);

  LayerFit fit;
  fit.output = layer_output(k.gram, solved.weights);
  fit.layer = TrainedLayer{x_prev, sigma, std::move(solved.weights), lap.recipe,
                           hp, solved.residual};
  return fit;
}

}  // namespace

SolveResult solve_layer(const KernelMatrix& k, const LaplacianMatrix& lap,
                        const Matrix& targets, const LayerHyperparams& hp) {
  check_hyperparams(hp);
  const Index n = k.gram.rows();
  if (lap.matrix.rows() != n || lap.matrix.cols() != n ||
      targets.rows() != n) {
    std::ostringstream msg;
    msg << "layer system shapes disagree: K is " << n << "x" << k.gram.cols()
        << ", L is " << lap.matrix.rows() << "x" << lap.matrix.cols()
        << ", targets have " << targets.rows() << " rows";
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }

  Matrix a = k.gram + (1.0 / hp.c) * (lap.matrix * k.gram);
  a.diagonal().array() += hp.lambda / hp.c;

  Eigen::PartialPivLU<Matrix> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > kRcondFloor)) {
    std::ostringstream msg;
    msg << "layer system is ill-conditioned (rcond " << rcond
        << ") with C=" << hp.c << ", lambda=" << hp.lambda;
    throw Error(ErrorCode::SingularSystem, msg.str());
  }

  Matrix w = lu.solve(targets);
  const double scale = std::max(1.0, targets.norm());
  const double residual = (a * w - targets).norm() / scale;
  if (!(residual <= kResidualBound)) {
    std::ostringstream msg;
    msg << "layer solve residual " << residual << " exceeds " << kResidualBound
        << " with C=" << hp.c << ", lambda=" << hp.lambda;
    throw Error(ErrorCode::SingularSystem, msg.str());
  }
  return SolveResult{std::move(w), residual};
}

LayerFit fit_autoencoder_layer(const Matrix& x_prev, const LayerHyperparams& hp,
                               const GraphRecipe& recipe) {
  return fit_layer(x_prev, x_prev, hp, recipe);
}

LayerFit fit_oneclass_layer(const Matrix& x_prev, double r,
                            const LayerHyperparams& hp,
                            const GraphRecipe& recipe) {
  const Matrix targets = Matrix::Constant(x_prev.rows(), 1, r);
  return fit_layer(x_prev, targets, hp, recipe);
}

Matrix transform(const TrainedLayer& layer, const Matrix& x_new) {
  if (x_new.cols() != layer.train_inputs.cols()) {
    std::ostringstream msg;
    msg << "transform input has " << x_new.cols() << " features, layer expects "
        << layer.train_inputs.cols();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  const Matrix k_new = rbf_kernel(x_new, layer.train_inputs, layer.sigma);
  return layer_output(k_new, layer.weights);
}

}  // namespace mkoc
