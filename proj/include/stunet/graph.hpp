#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <vector>

#include "stunet/tensor.hpp"

namespace stunet {

struct Edge {
  std::size_t u = 0;  // u < v
  std::size_t v = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected weighted graph on nodes 0..N-1 backed by a dense symmetric
// adjacency with zero diagonal and nonnegative weights.
class Graph {
 public:
  Graph() = default;
  // Throws GraphError unless `weights` is square, symmetric within 1e-12,
  // nonnegative, finite, and zero on the diagonal.
  explicit Graph(Eigen::MatrixXd weights);

  static Graph from_edges(std::size_t num_nodes, const std::vector<Edge>& edges);

  std::size_t num_nodes() const { return static_cast<std::size_t>(weights_.rows()); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  double weight(std::size_t i, std::size_t j) const { return weights_(i, j); }
  double degree(std::size_t i) const;  // weighted
  std::size_t neighbor_count(std::size_t i) const;
  // Edges with positive weight, sorted by (u, v).
  std::vector<Edge> edges() const;
  std::size_t num_edges() const;
  double total_weight() const;

 private:
  Eigen::MatrixXd weights_;
};

struct LaplacianOptions {
  // Skip power iteration and use the common bound λ_max = 2.
  bool assume_lambda_max_two = false;
  double tolerance = 1e-7;
  int max_iterations = 10000;
};

struct GraphLaplacian {
  Eigen::MatrixXd normalized;  // L = I - D^{-1/2} W D^{-1/2}
  double lambda_max = 2.0;
  // 2L/λ_max - I, shared so recorded convolutions can hold it cheaply.
  std::shared_ptr<const Eigen::MatrixXd> rescaled_ptr;

  const Eigen::MatrixXd& rescaled() const { return *rescaled_ptr; }
  std::size_t num_nodes() const { return static_cast<std::size_t>(normalized.rows()); }
};

// Builds the rescaled operator from L and a chosen λ_max.
GraphLaplacian make_laplacian(Eigen::MatrixXd normalized, double lambda_max);

// Isolated nodes take D^{-1/2} = 0, so their row of L is the identity row.
GraphLaplacian normalized_laplacian(const Graph& g, const LaplacianOptions& options = {});

// Largest eigenvalue of a symmetric matrix by shifted power iteration.
// Falls back to 2 with a logged warning if the residual does not drop below
// tolerance within the iteration budget.
double estimate_lambda_max(const Eigen::MatrixXd& laplacian, const LaplacianOptions& options = {});

// Chebyshev coefficients θ shaped [K × C_out × C_in].
struct ChebKernel {
  Tensor theta;

  std::size_t order() const { return theta.extent(0); }
  std::size_t out_channels() const { return theta.extent(1); }
  std::size_t in_channels() const { return theta.extent(2); }
};

ChebKernel make_cheb_kernel(std::size_t order, std::size_t out_channels, std::size_t in_channels,
                            std::uint64_t seed);

// y = Σ_k T_k(L̃) · x · θ_kᵀ via the three-term recursion on the signal.
// x is [N × C_in] or [N × B × C_in]; the graph acts on axis 0.
Tensor cheb_conv(const ChebKernel& kernel, const GraphLaplacian& lap, const Tensor& x);
// Same with a bare [K × C_out × C_in] coefficient tensor.
Tensor cheb_conv(const Tensor& theta, const GraphLaplacian& lap, const Tensor& x);

// Plain L·x over axis 0 for a constant matrix (no gradient w.r.t. L).
Tensor graph_propagate(const Eigen::MatrixXd& op, const Tensor& x);

struct SpectralDecomposition {
  Eigen::MatrixXd eigenvectors;  // columns form the graph Fourier basis U
  Eigen::VectorXd eigenvalues;   // ascending
};

// Cyclic Jacobi rotations until the off-diagonal mass drops below 1e-10.
SpectralDecomposition jacobi_eigen(const Eigen::MatrixXd& symmetric, double tolerance = 1e-10,
                                   int max_sweeps = 100);

// Exact spectral filtering U · (Σ_k θ_k T_k(Λ̃)) · Uᵀ · x for x of shape
// [N × C_in]. Test oracle only; N ≤ 64.
Tensor spectral_conv_oracle(const ChebKernel& kernel, const SpectralDecomposition& decomp,
                            double lambda_max, const Tensor& x);

}  // namespace stunet
