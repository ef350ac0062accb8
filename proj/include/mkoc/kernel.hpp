#ifndef MKOC_KERNEL_HPP
#define MKOC_KERNEL_HPP

#include "mkoc/types.hpp"

namespace mkoc {

struct KernelMatrix {
  Matrix gram;   // N x N, symmetric, unit diagonal for RBF
  double sigma;  // width used to build it
};

// Squared Euclidean distances between all rows of a and b, |a| x |b|.
// Expanded form, clamped at zero.
Matrix pairwise_sq_dist(const Matrix& a, const Matrix& b);

// sigma heuristic: mean unsquared Euclidean distance over unordered row
// pairs. All-identical rows give sigma 0, reported as degenerate data.
double mean_distance_sigma(const Matrix& x);

// Cross RBF kernel, |a| x |b|.
Matrix rbf_kernel(const Matrix& a, const Matrix& b, double sigma);

// Training Gram: exactly symmetric with exact unit diagonal. Entries agree
// bitwise with rbf_kernel(x, x, sigma).
KernelMatrix rbf_kernel(const Matrix& x, double sigma);

}  // namespace mkoc

#endif
