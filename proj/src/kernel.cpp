#include "mkoc/kernel.hpp"

#include <cmath>
#include <sstream>

namespace mkoc {

namespace {

// Strict left-to-right accumulation. Eigen's vectorized dot can split the
// reduction by buffer alignment, making results depend on allocation
// addresses; kernel entries must depend on values only so that a layer's
// training snapshot kernelizes bitwise-identically to the original data and
// reruns stay byte-reproducible.
double row_dot(const Matrix& a, Index i, const Matrix& b, Index j) {
  double dot = 0.0;
  for (Index c = 0; c < a.cols(); ++c) dot += a(i, c) * b(j, c);
  return dot;
}

// Shared entry formula: ||a_i||^2 + ||b_j||^2 - 2 a_i.b_j, clamped at zero.
// The gram builder and the cross kernel go through this single path so they
// agree bitwise on equal inputs.
double sq_dist_entry(const Matrix& a, const Matrix& b, const Vector& sq_a,
                     const Vector& sq_b, Index i, Index j) {
  double d = sq_a[i] + sq_b[j] - 2.0 * row_dot(a, i, b, j);
  return d > 0.0 ? d : 0.0;
}

Vector row_sq_norms(const Matrix& m) {
  Vector sq(m.rows());
  for (Index i = 0; i < m.rows(); ++i) sq[i] = row_dot(m, i, m, i);
  return sq;
}

void check_cols(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << "feature dimension mismatch: " << a.cols() << " vs " << b.cols();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
}

}  // namespace

Matrix pairwise_sq_dist(const Matrix& a, const Matrix& b) {
  check_cols(a, b);
  const Vector sq_a = row_sq_norms(a);
  const Vector sq_b = row_sq_norms(b);
  Matrix d(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j)
      d(i, j) = sq_dist_entry(a, b, sq_a, sq_b, i, j);
  return d;
}

double mean_distance_sigma(const Matrix& x) {
  const Index n = x.rows();
  if (n < 2)
    throw Error(ErrorCode::InvalidArgument,
                "sigma heuristic needs at least 2 samples, got " +
                    std::to_string(n));
  const Vector sq = row_sq_norms(x);
  double sum = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      sum += std::sqrt(sq_dist_entry(x, x, sq, sq, i, j));
  const double sigma = sum / (0.5 * static_cast<double>(n) *
                              static_cast<double>(n - 1));
  if (sigma <= 0.0)
    throw Error(ErrorCode::DegenerateData,
                "all training rows identical: sigma heuristic is 0");
  return sigma;
}

Matrix rbf_kernel(const Matrix& a, const Matrix& b, double sigma) {
  if (sigma <= 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "rbf kernel requires sigma > 0, got " + std::to_string(sigma));
  check_cols(a, b);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const Vector sq_a = row_sq_norms(a);
  const Vector sq_b = row_sq_norms(b);
  Matrix k(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j)
      k(i, j) = std::exp(-sq_dist_entry(a, b, sq_a, sq_b, i, j) * inv);
  return k;
}

KernelMatrix rbf_kernel(const Matrix& x, double sigma) {
  if (sigma <= 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "rbf kernel requires sigma > 0, got " + std::to_string(sigma));
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const Vector sq = row_sq_norms(x);
  const Index n = x.rows();
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-sq_dist_entry(x, x, sq, sq, i, j) * inv);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return KernelMatrix{std::move(k), sigma};
}

}  // namespace mkoc
