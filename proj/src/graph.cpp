#include "mkoc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mkoc/random.hpp"

namespace mkoc {

namespace {

void check_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << what << " must be square, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
}

// Indices of the `k` nearest points to i (excluding i) under the distance
// row d2.row(i). Ties break on the lower index so results are order-stable.
std::vector<Index> nearest_neighbors(const Matrix& d2, Index i, int k) {
  std::vector<Index> idx;
  idx.reserve(d2.cols() - 1);
  for (Index j = 0; j < d2.cols(); ++j)
    if (j != i) idx.push_back(j);
  std::sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    if (d2(i, a) != d2(i, b)) return d2(i, a) < d2(i, b);
    return a < b;
  });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

// (1/N)(delta_ij - [same cluster]/N_c). centering_laplacian is the
// single-cluster case of the same expression, so the two agree bitwise.
Matrix partition_centering(const std::vector<int>& assignment,
                           const std::vector<Index>& counts, Index n) {
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double inv_c = 1.0 / static_cast<double>(counts[assignment[i]]);
    for (Index j = 0; j < n; ++j) {
      double v = (i == j) ? 1.0 : 0.0;
      if (assignment[i] == assignment[j]) v -= inv_c;
      m(i, j) = inv_n * v;
    }
  }
  return m;
}

}  // namespace

Matrix kernel_space_sq_dist(const KernelMatrix& k) {
  check_square(k.gram, "kernel matrix");
  const Index n = k.gram.rows();
  Matrix d(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double v = k.gram(i, i) + k.gram(j, j) - 2.0 * k.gram(i, j);
      d(i, j) = v > 0.0 ? v : 0.0;
    }
  return d;
}

NeighborGraph heat_knn_graph(const KernelMatrix& k, int neighbors,
                             double sigma) {
  const Index n = k.gram.rows();
  if (neighbors < 1 || neighbors > n - 1) {
    std::ostringstream msg;
    msg << "neighbor count " << neighbors << " out of range [1, " << n - 1
        << "]";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
  if (sigma <= 0.0)
    throw Error(ErrorCode::InvalidArgument, "heat graph requires sigma > 0");

  const Matrix d2 = kernel_space_sq_dist(k);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  Matrix v = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j : nearest_neighbors(d2, i, neighbors))
      v(i, j) = std::exp(-d2(i, j) * inv);
  // symmetrize: keep an edge if either endpoint selected it
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double w = std::max(v(i, j), v(j, i));
      v(i, j) = w;
      v(j, i) = w;
    }
  v.diagonal().setZero();
  return NeighborGraph{std::move(v), neighbors};
}

LaplacianMatrix degree_laplacian(const NeighborGraph& g) {
  check_square(g.weights, "weight matrix");
  const Index n = g.weights.rows();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (std::abs(g.weights(i, j) - g.weights(j, i)) > 1e-10)
        throw Error(ErrorCode::InvalidArgument,
                    "neighbor graph weights must be symmetric");
      if (g.weights(i, j) < 0.0)
        throw Error(ErrorCode::InvalidArgument,
                    "neighbor graph weights must be nonnegative");
    }
  Matrix l = -g.weights;
  for (Index i = 0; i < n; ++i) l(i, i) = g.weights.row(i).sum();
  GraphRecipe recipe;
  recipe.kind = GraphKind::LeKnn;
  recipe.knn_k = g.k;
  return LaplacianMatrix{std::move(l), recipe};
}

Matrix lle_reconstruction_weights(const KernelMatrix& k, int neighbors,
                                  double reg) {
  const Index n = k.gram.rows();
  if (neighbors < 1 || neighbors > n - 1) {
    std::ostringstream msg;
    msg << "neighbor count " << neighbors << " out of range [1, " << n - 1
        << "]";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }

  const Matrix d2 = kernel_space_sq_dist(k);
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const std::vector<Index> nb = nearest_neighbors(d2, i, neighbors);
    const Index m = static_cast<Index>(nb.size());
    // local Gram of difference vectors, entirely from kernel entries:
    // G_jl = <phi_i - phi_j, phi_i - phi_l>
    Eigen::MatrixXd g(m, m);
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b)
        g(a, b) = k.gram(i, i) - k.gram(i, nb[a]) - k.gram(i, nb[b]) +
                  k.gram(nb[a], nb[b]);
    double ridge = reg * g.trace();
    if (ridge <= 0.0) ridge = reg;  // coincident neighbors: trace is 0
    g.diagonal().array() += ridge;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    Eigen::VectorXd sol = ldlt.solve(Eigen::VectorXd::Ones(m));
    const double sum = sol.sum();
    if (ldlt.info() != Eigen::Success ||
        (g * sol - Eigen::VectorXd::Ones(m)).norm() > 1e-6 * std::sqrt(m) ||
        std::abs(sum) < 1e-12) {
      std::ostringstream msg;
      msg << "singular local reconstruction system at sample " << i
          << " (k=" << neighbors << ", reg=" << reg << ")";
      throw Error(ErrorCode::SingularSystem, msg.str());
    }
    sol /= sum;
    for (Index a = 0; a < m; ++a) w(i, nb[a]) = sol[a];
  }
  return w;
}

LaplacianMatrix lle_laplacian(const KernelMatrix& k, int neighbors,
                              double reg) {
  const Index n = k.gram.rows();
  const Matrix w = lle_reconstruction_weights(k, neighbors, reg);
  Matrix iw = Matrix::Identity(n, n) - w;
  // rank update keeps M = (I-W)^T (I-W) exactly symmetric
  Matrix lower = Matrix::Zero(n, n);
  lower.selfadjointView<Eigen::Lower>().rankUpdate(iw.transpose());
  Matrix m = lower.selfadjointView<Eigen::Lower>();

  GraphRecipe recipe;
  recipe.kind = GraphKind::Lle;
  recipe.knn_k = neighbors;
  recipe.lle_reg = reg;
  return LaplacianMatrix{std::move(m), recipe};
}

LaplacianMatrix centering_laplacian(Index n) {
  if (n < 1)
    throw Error(ErrorCode::InvalidArgument, "centering Laplacian needs n >= 1");
  const std::vector<int> assignment(static_cast<std::size_t>(n), 0);
  const std::vector<Index> counts{n};
  GraphRecipe recipe;
  recipe.kind = GraphKind::LdaCentering;
  return LaplacianMatrix{partition_centering(assignment, counts, n), recipe};
}

KernelKmeansResult kernel_kmeans(const Matrix& gram, int clusters,
                                 std::uint64_t seed, int max_iter) {
  check_square(gram, "kernel matrix");
  const Index n = gram.rows();
  if (clusters < 1 || clusters > n) {
    std::ostringstream msg;
    msg << "cluster count " << clusters << " out of range [1, " << n << "]";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
  const int k = clusters;

  auto point_d2 = [&](Index i, Index j) {
    const double v = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
    return v > 0.0 ? v : 0.0;
  };

  // k-means++ style seeding over actual points
  std::mt19937_64 rng = make_rng(seed, 0x6b6d6e73);  // "kmns"
  std::vector<Index> centers;
  centers.push_back(static_cast<Index>(rng_bounded(rng, n)));
  Vector best_d2(n);
  for (Index i = 0; i < n; ++i) best_d2[i] = point_d2(i, centers[0]);
  while (static_cast<int>(centers.size()) < k) {
    const double total = best_d2.sum();
    Index chosen = -1;
    if (total > 0.0) {
      double r = rng_unit(rng) * total;
      for (Index i = 0; i < n; ++i) {
        r -= best_d2[i];
        if (r <= 0.0) {
          chosen = i;
          break;
        }
      }
      if (chosen < 0) chosen = n - 1;
    } else {
      // all remaining mass is zero (duplicate points): take the first
      // index that is not yet a center
      for (Index i = 0; i < n && chosen < 0; ++i)
        if (std::find(centers.begin(), centers.end(), i) == centers.end())
          chosen = i;
    }
    centers.push_back(chosen);
    for (Index i = 0; i < n; ++i)
      best_d2[i] = std::min(best_d2[i], point_d2(i, chosen));
  }

  std::vector<int> assignment(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double d = point_d2(i, centers[static_cast<std::size_t>(c)]);
      if (d < best) {
        best = d;
        assignment[i] = c;
      }
    }
  }

  KernelKmeansResult result;
  result.clusters = k;
  result.iterations = 0;

  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  Vector inner(k);   // (1/|c|^2) sum_{j,l in c} K_jl
  Matrix cross(n, k);  // (1/|c|) sum_{j in c} K_ij
  for (int iter = 0; iter < max_iter; ++iter) {
    std::fill(counts.begin(), counts.end(), 0);
    for (Index i = 0; i < n; ++i) ++counts[assignment[i]];

    cross.setZero();
    for (Index j = 0; j < n; ++j)
      cross.col(assignment[j]) += gram.col(j);
    inner.setZero();
    for (Index j = 0; j < n; ++j) inner[assignment[j]] += cross(j, assignment[j]);
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[c]);
      cross.col(c) *= inv;
      inner[c] *= inv * inv;
    }

    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = assignment[i];
      for (int c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        const double d = gram(i, i) - 2.0 * cross(i, c) + inner[c];
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      if (best_c != assignment[i]) {
        assignment[i] = best_c;
        changed = true;
      }
    }
    ++result.iterations;

    // within-cluster scatter for the updated assignment
    std::vector<Index> cnt(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) ++cnt[assignment[i]];
    double obj = gram.trace();
    for (int c = 0; c < k; ++c) {
      if (cnt[c] == 0) continue;
      double s = 0.0;
      for (Index a = 0; a < n; ++a) {
        if (assignment[a] != c) continue;
        for (Index b = 0; b < n; ++b)
          if (assignment[b] == c) s += gram(a, b);
      }
      obj -= s / static_cast<double>(cnt[c]);
    }
    result.objective.push_back(obj);

    if (!changed) break;
  }

  result.assignment = std::move(assignment);
  return result;
}

LaplacianMatrix cda_laplacian(const KernelMatrix& k, int clusters,
                              std::uint64_t seed) {
  const Index n = k.gram.rows();

  auto counts_of = [&](const KernelKmeansResult& km) {
    std::vector<Index> counts(static_cast<std::size_t>(clusters), 0);
    for (int a : km.assignment) ++counts[a];
    return counts;
  };
  auto has_empty = [](const std::vector<Index>& counts) {
    return std::any_of(counts.begin(), counts.end(),
                       [](Index c) { return c == 0; });
  };

  KernelKmeansResult km = kernel_kmeans(k.gram, clusters, seed);
  std::vector<Index> counts = counts_of(km);
  if (has_empty(counts)) {
    km = kernel_kmeans(k.gram, clusters, seed + 1);  // one re-seed
    counts = counts_of(km);
    if (has_empty(counts))
      throw Error(ErrorCode::EmptyCluster,
                  "kernel k-means produced an empty cluster twice (k=" +
                      std::to_string(clusters) + ")");
  }

  GraphRecipe recipe;
  recipe.kind = GraphKind::Cda;
  recipe.cda_clusters = clusters;
  recipe.seed = seed;
  return LaplacianMatrix{partition_centering(km.assignment, counts, n), recipe};
}

LaplacianMatrix zero_laplacian(Index n) {
  GraphRecipe recipe;
  recipe.kind = GraphKind::Zero;
  return LaplacianMatrix{Matrix::Zero(n, n), recipe};
}

LaplacianMatrix build_laplacian(const KernelMatrix& k, const GraphRecipe& recipe) {
  const Index n = k.gram.rows();
  const int k_eff = static_cast<int>(
      std::min<Index>(recipe.knn_k, n - 1));  // knob clamped to valid range
  switch (recipe.kind) {
    case GraphKind::Zero:
      return zero_laplacian(n);
    case GraphKind::LeKnn: {
      LaplacianMatrix l = degree_laplacian(heat_knn_graph(k, k_eff, k.sigma));
      l.recipe = recipe;
      l.recipe.knn_k = k_eff;
      return l;
    }
    case GraphKind::Lle: {
      LaplacianMatrix l = lle_laplacian(k, k_eff, recipe.lle_reg);
      l.recipe = recipe;
      l.recipe.knn_k = k_eff;
      return l;
    }
    case GraphKind::LdaCentering: {
      LaplacianMatrix l = centering_laplacian(n);
      l.recipe = recipe;
      return l;
    }
    case GraphKind::Cda:
      return cda_laplacian(k, recipe.cda_clusters, recipe.seed);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown graph recipe");
}

}  // namespace mkoc
