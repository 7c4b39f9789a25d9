#include "stunet/graph.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stunet/adam.hpp"
#include "stunet/errors.hpp"

namespace stunet {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

}  // namespace

Graph::Graph(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols()) throw GraphError("adjacency must be square");
  const auto n = weights_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights_(i, i) != 0.0) throw GraphError("adjacency diagonal must be zero");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = weights_(i, j);
      if (!std::isfinite(w)) throw GraphError("adjacency contains a non-finite weight");
      if (w < 0.0) throw GraphError("adjacency contains a negative weight");
      if (std::abs(w - weights_(j, i)) > 1e-12) throw GraphError("adjacency is not symmetric");
    }
  }
}

Graph Graph::from_edges(std::size_t num_nodes, const std::vector<Edge>& edges) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(num_nodes, num_nodes);
  for (const auto& e : edges) {
    if (e.u >= num_nodes || e.v >= num_nodes) throw GraphError("edge endpoint out of range");
    if (e.u == e.v) throw GraphError("self loops are not allowed");
    w(e.u, e.v) = e.weight;
    w(e.v, e.u) = e.weight;
  }
  return Graph(std::move(w));
}

double Graph::degree(std::size_t i) const { return weights_.row(i).sum(); }

std::size_t Graph::neighbor_count(std::size_t i) const {
  std::size_t c = 0;
  for (Eigen::Index j = 0; j < weights_.cols(); ++j) c += weights_(i, j) > 0.0;
  return c;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  const std::size_t n = num_nodes();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (weights_(i, j) > 0.0) out.push_back({i, j, weights_(i, j)});
  return out;
}

std::size_t Graph::num_edges() const { return edges().size(); }

double Graph::total_weight() const { return weights_.sum() / 2.0; }

GraphLaplacian make_laplacian(Eigen::MatrixXd normalized, double lambda_max) {
  GraphLaplacian lap;
  const auto n = normalized.rows();
  lap.lambda_max = lambda_max;
  lap.rescaled_ptr = std::make_shared<const Eigen::MatrixXd>(
      (2.0 / lambda_max) * normalized - Eigen::MatrixXd::Identity(n, n));
  lap.normalized = std::move(normalized);
  return lap;
}

GraphLaplacian normalized_laplacian(const Graph& g, const LaplacianOptions& options) {
  const std::size_t n = g.num_nodes();
  Eigen::VectorXd inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = g.degree(i);
    inv_sqrt_deg(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
  l -= inv_sqrt_deg.asDiagonal() * g.weights() * inv_sqrt_deg.asDiagonal();
  // Remove rounding asymmetry from the diagonal scaling.
  l = 0.5 * (l + l.transpose()).eval();
  const double lambda = options.assume_lambda_max_two ? 2.0 : estimate_lambda_max(l, options);
  return make_laplacian(std::move(l), lambda);
}

double estimate_lambda_max(const Eigen::MatrixXd& laplacian, const LaplacianOptions& options) {
  const auto n = laplacian.rows();
  if (n == 0 || laplacian.cols() != n) throw GraphError("estimate_lambda_max: matrix must be square");

  // Gershgorin shift making every eigenvalue nonnegative, so the dominant
  // eigenvalue of the shifted matrix is the largest one.
  double shift = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double radius = laplacian.row(i).cwiseAbs().sum() - std::abs(laplacian(i, i));
    shift = std::max(shift, radius - laplacian(i, i));
  }
  Eigen::MatrixXd shifted = laplacian + shift * Eigen::MatrixXd::Identity(n, n);

  Eigen::VectorXd v(n);
  std::uint64_t state = 0x9e3779b97f4a7c15ULL;
  for (Eigen::Index i = 0; i < n; ++i) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    v(i) = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
  }
  v.normalize();

  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd w = shifted * v;
    const double mu = v.dot(w);
    const double residual = (w - mu * v).norm();
    if (residual <= options.tolerance) return mu - shift;
    const double norm = w.norm();
    if (norm == 0.0) return mu - shift;
    v = w / norm;
  }
  spdlog::warn("power iteration did not converge in {} iterations; using lambda_max = 2",
               options.max_iterations);
  return 2.0;
}

ChebKernel make_cheb_kernel(std::size_t order, std::size_t out_channels, std::size_t in_channels,
                            std::uint64_t seed) {
  if (order == 0) throw UsageError("Chebyshev order K must be at least 1");
  return ChebKernel{glorot_init({order, out_channels, in_channels}, seed)};
}

Tensor graph_propagate(const Eigen::MatrixXd& op, const Tensor& x) {
  const std::size_t n = x.extent(0);
  if (static_cast<std::size_t>(op.rows()) != n || op.cols() != op.rows()) {
    throw DimensionError("graph_propagate: operator does not match " + shape_string(x.shape()));
  }
  const std::size_t width = x.size() / n;
  std::vector<double> out(x.size());
  MutMap(out.data(), n, width).noalias() = op * ConstMap(x.values().data(), n, width);
  auto shared = std::make_shared<const Eigen::MatrixXd>(op);
  return record_op("graph_propagate", x.shape(), std::move(out), {x},
                   [x, shared, n, width](std::span<const double> g, std::span<const double>) {
                     if (auto gx = grad_sink(x); !gx.empty())
                       MutMap(gx.data(), n, width).noalias() +=
                           shared->transpose() * ConstMap(g.data(), n, width);
                   });
}

Tensor cheb_conv(const ChebKernel& kernel, const GraphLaplacian& lap, const Tensor& x) {
  return cheb_conv(kernel.theta, lap, x);
}

Tensor cheb_conv(const Tensor& theta, const GraphLaplacian& lap, const Tensor& x) {
  if (theta.rank() != 3) throw DimensionError("cheb_conv: theta must be [K x C_out x C_in]");
  const std::size_t order = theta.extent(0), c_out = theta.extent(1), c_in = theta.extent(2);
  const std::size_t n = lap.num_nodes();
  if (x.rank() < 2 || x.extent(0) != n || x.shape().back() != c_in) {
    throw DimensionError("cheb_conv: input " + shape_string(x.shape()) + " does not match N=" +
                         std::to_string(n) + ", C_in=" + std::to_string(c_in));
  }
  const std::size_t width = x.size() / n;  // B * C_in
  const std::size_t rows = x.size() / c_in;  // N * B
  const auto scaled = lap.rescaled_ptr;
  const Eigen::MatrixXd& lt = *scaled;

  // basis[k] holds T_k(L̃)·x.
  std::vector<std::vector<double>> basis(order, std::vector<double>(x.size()));
  std::copy(x.values().begin(), x.values().end(), basis[0].begin());
  if (order > 1) {
    MutMap(basis[1].data(), n, width).noalias() = lt * ConstMap(basis[0].data(), n, width);
  }
  for (std::size_t k = 2; k < order; ++k) {
    MutMap tk(basis[k].data(), n, width);
    tk.noalias() = 2.0 * lt * ConstMap(basis[k - 1].data(), n, width);
    tk -= ConstMap(basis[k - 2].data(), n, width);
  }

  std::vector<double> out(rows * c_out, 0.0);
  MutMap y(out.data(), rows, c_out);
  const double* th = theta.values().data();
  for (std::size_t k = 0; k < order; ++k) {
    y.noalias() += ConstMap(basis[k].data(), rows, c_in) *
                   ConstMap(th + k * c_out * c_in, c_out, c_in).transpose();
  }

  Shape shape = x.shape();
  shape.back() = c_out;
  return record_op(
      "cheb_conv", std::move(shape), std::move(out), {theta, x},
      [theta, x, scaled, basis = std::move(basis), order, c_out, c_in, n, width, rows](
          std::span<const double> g, std::span<const double>) {
        ConstMap G(g.data(), rows, c_out);
        const double* th = theta.values().data();
        if (auto gt = grad_sink(theta); !gt.empty()) {
          for (std::size_t k = 0; k < order; ++k) {
            MutMap(gt.data() + k * c_out * c_in, c_out, c_in).noalias() +=
                G.transpose() * ConstMap(basis[k].data(), rows, c_in);
          }
        }
        auto gx = grad_sink(x);
        if (gx.empty()) return;
        // Adjoints of T_k, propagated back through the recursion.
        std::vector<std::vector<double>> adj(order, std::vector<double>(rows * c_in));
        for (std::size_t k = 0; k < order; ++k) {
          MutMap(adj[k].data(), rows, c_in).noalias() =
              G * ConstMap(th + k * c_out * c_in, c_out, c_in);
        }
        const Eigen::MatrixXd lt_t = scaled->transpose();
        for (std::size_t k = order - 1; k >= 2; --k) {
          MutMap(adj[k - 1].data(), n, width).noalias() +=
              2.0 * lt_t * ConstMap(adj[k].data(), n, width);
          MutMap(adj[k - 2].data(), n, width) -= ConstMap(adj[k].data(), n, width);
        }
        if (order > 1) {
          MutMap(adj[0].data(), n, width).noalias() += lt_t * ConstMap(adj[1].data(), n, width);
        }
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += adj[0][i];
      });
}

SpectralDecomposition jacobi_eigen(const Eigen::MatrixXd& symmetric, double tolerance,
                                   int max_sweeps) {
  const auto n = symmetric.rows();
  if (symmetric.cols() != n) throw UsageError("jacobi_eigen: matrix must be square");
  Eigen::MatrixXd a = symmetric;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) < tolerance) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = a(order[i], order[i]);
    out.eigenvectors.col(i) = v.col(order[i]);
  }
  return out;
}

Tensor spectral_conv_oracle(const ChebKernel& kernel, const SpectralDecomposition& decomp,
                            double lambda_max, const Tensor& x) {
  const auto n = decomp.eigenvalues.size();
  if (n > 64) throw UsageError("spectral_conv_oracle is limited to N <= 64");
  const Tensor& theta = kernel.theta;
  const std::size_t order = theta.extent(0), c_out = theta.extent(1), c_in = theta.extent(2);
  if (x.rank() != 2 || x.extent(0) != static_cast<std::size_t>(n) || x.extent(1) != c_in) {
    throw DimensionError("spectral_conv_oracle: input " + shape_string(x.shape()) + " mismatch");
  }
  Eigen::MatrixXd xm(n, c_in);
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t c = 0; c < c_in; ++c) xm(i, c) = x.at(i, c);
  const Eigen::MatrixXd& u = decomp.eigenvectors;
  Eigen::MatrixXd x_hat = u.transpose() * xm;
  Eigen::MatrixXd y_hat = Eigen::MatrixXd::Zero(n, c_out);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = 2.0 * decomp.eigenvalues(i) / lambda_max - 1.0;
    std::vector<double> cheb(order);
    cheb[0] = 1.0;
    if (order > 1) cheb[1] = lam;
    for (std::size_t k = 2; k < order; ++k) cheb[k] = 2.0 * lam * cheb[k - 1] - cheb[k - 2];
    for (std::size_t o = 0; o < c_out; ++o) {
      for (std::size_t c = 0; c < c_in; ++c) {
        double response = 0.0;
        for (std::size_t k = 0; k < order; ++k)
          response += theta[(k * c_out + o) * c_in + c] * cheb[k];
        y_hat(i, o) += response * x_hat(i, c);
      }
    }
  }
  Eigen::MatrixXd y = u * y_hat;
  std::vector<double> out(n * c_out);
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t o = 0; o < c_out; ++o) out[i * c_out + o] = y(i, o);
  return Tensor({static_cast<std::size_t>(n), c_out}, std::move(out));
}

}  // namespace stunet
