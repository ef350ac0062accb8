#ifndef MKOC_GRAPH_HPP
#define MKOC_GRAPH_HPP

#include <cstdint>
#include <vector>

#include "mkoc/kernel.hpp"
#include "mkoc/types.hpp"

namespace mkoc {

enum class GraphKind : int {
  Zero = 0,          // no graph term: plain ridge layer
  LeKnn = 1,         // heat-kernel k-NN Laplacian D - V
  Lle = 2,           // (I-W)^T (I-W) from local reconstruction weights
  LdaCentering = 3,  // global variance: (1/N)(I - 11^T/N)
  Cda = 4,           // per-cluster centering from kernel k-means
};

struct GraphRecipe {
  GraphKind kind = GraphKind::Zero;
  int knn_k = 10;          // clamped to N-1 at build time
  double lle_reg = 1e-3;   // local Gram conditioning
  int cda_clusters = 2;
  std::uint64_t seed = 0;  // k-means seeding
};

struct NeighborGraph {
  Matrix weights;  // symmetric, nonnegative, zero diagonal
  int k;
};

struct LaplacianMatrix {
  Matrix matrix;
  GraphRecipe recipe;
};

// ||phi_i - phi_j||^2 from Gram entries, clamped at zero.
Matrix kernel_space_sq_dist(const KernelMatrix& k);

// k-NN graph in kernel space with heat-kernel edge weights, symmetrized
// by elementwise max.
NeighborGraph heat_knn_graph(const KernelMatrix& k, int neighbors, double sigma);

LaplacianMatrix degree_laplacian(const NeighborGraph& g);

// Row i holds the sum-to-one weights over i's kernel-space neighbors that
// best reconstruct phi_i; zero elsewhere.
Matrix lle_reconstruction_weights(const KernelMatrix& k, int neighbors,
                                  double reg);

// M = (I-W)^T (I-W) from the reconstruction weights above.
LaplacianMatrix lle_laplacian(const KernelMatrix& k, int neighbors, double reg);

// (1/N)(I - 11^T/N): the single-class global-variance graph.
LaplacianMatrix centering_laplacian(Index n);

// Per-cluster centering Laplacian over a kernel k-means partition.
LaplacianMatrix cda_laplacian(const KernelMatrix& k, int clusters,
                              std::uint64_t seed);

LaplacianMatrix zero_laplacian(Index n);

// Dispatch on recipe.kind; the heat graph reuses the kernel's own sigma.
LaplacianMatrix build_laplacian(const KernelMatrix& k, const GraphRecipe& recipe);

struct KernelKmeansResult {
  std::vector<int> assignment;
  int clusters;
  int iterations;
  std::vector<double> objective;  // within-cluster scatter after each sweep
};

// Lloyd iterations on implicit kernel-space centroids, k-means++ style
// seeding. Deterministic given the seed.
KernelKmeansResult kernel_kmeans(const Matrix& gram, int clusters,
                                 std::uint64_t seed, int max_iter = 100);

}  // namespace mkoc

#endif
