#include "stunet/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "stunet/errors.hpp"
#include "tape.hpp"

namespace stunet {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

thread_local bool g_grad_enabled = true;

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.defined() && b.defined(), std::string(op) + ": undefined operand");
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

std::size_t trailing_size(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t i = 1; i < s.size(); ++i) n *= s[i];
  return n;
}

std::size_t leading_size(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) n *= s[i];
  return n;
}

template <typename Fwd, typename Deriv>
Tensor unary(const char* name, const Tensor& x, Fwd fwd, Deriv deriv) {
  auto in = x.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return record_op(name, x.shape(), std::move(out), {x},
                   [x, deriv](std::span<const double> g, std::span<const double> y) {
                     auto gx = grad_sink(x);
                     if (gx.empty()) return;
                     auto xv = x.values();
                     for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(xv[i], y[i]);
                   });
}

}  // namespace

namespace detail {
std::uint64_t next_node_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}
}  // namespace detail

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill, bool requires_grad)
    : Tensor(shape, std::vector<double>(shape_size(shape), fill), requires_grad) {}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape.empty()) throw DimensionError("tensor rank must be at least 1");
  for (auto e : shape) {
    if (e == 0) throw DimensionError("tensor extents must be positive: " + shape_string(shape));
  }
  if (shape_size(shape) != values.size()) {
    throw DimensionError("tensor data length " + std::to_string(values.size()) +
                         " does not match shape " + shape_string(shape));
  }
  node_ = std::make_shared<detail::TapeNode>();
  node_->id = detail::next_node_id();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, std::vector<double>{value}, requires_grad);
}

Tensor Tensor::vector(std::initializer_list<double> values, bool requires_grad) {
  return Tensor({values.size()}, std::vector<double>(values), requires_grad);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows,
                      bool requires_grad) {
  std::size_t cols = rows.size() ? rows.begin()->size() : 0;
  std::vector<double> data;
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), cols}, std::move(data), requires_grad);
}

const Shape& Tensor::shape() const {
  if (!node_) throw UsageError("use of undefined tensor");
  return node_->shape;
}

std::size_t Tensor::extent(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) throw DimensionError("axis out of range for " + shape_string(s));
  return s[axis];
}

std::size_t Tensor::size() const { return node_ ? node_->value.size() : 0; }

std::span<const double> Tensor::values() const {
  if (!node_) throw UsageError("use of undefined tensor");
  return node_->value;
}

std::span<double> Tensor::mutable_values() {
  if (!node_) throw UsageError("use of undefined tensor");
  if (!node_->leaf) throw UsageError("only leaf tensors may be modified in place");
  return node_->value;
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() requires a single-element tensor");
  return node_->value[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  const auto& s = shape();
  if (s.size() != 2) throw DimensionError("at(row, col) requires a matrix");
  if (row >= s[0] || col >= s[1]) throw DimensionError("index out of range");
  return node_->value[row * s[1] + col];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

bool Tensor::is_leaf() const { return node_ && node_->leaf; }

std::span<const double> Tensor::grad() const {
  if (!node_) return {};
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

Tensor Tensor::detach() const { return Tensor(shape(), node_->value, false); }

Tensor Tensor::clone(bool requires_grad) const {
  return Tensor(shape(), node_->value, requires_grad);
}

void Tensor::backward() const {
  if (!node_) throw UsageError("backward on undefined tensor");
  if (node_->value.size() != 1) {
    throw UsageError("backward requires a scalar loss, got " + shape_string(node_->shape));
  }
  if (!node_->requires_grad) throw UsageError("backward on a tensor that is not on the tape");

  std::vector<detail::TapeNode*> order;
  std::unordered_set<const detail::TapeNode*> seen;
  std::vector<detail::TapeNode*> stack{node_.get()};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(),
            [](const detail::TapeNode* a, const detail::TapeNode* b) { return a->id > b->id; });

  // Interior gradients are per-pass; leaf gradients accumulate.
  for (auto* n : order) {
    if (!n->leaf) n->grad.assign(n->value.size(), 0.0);
  }
  node_->grad_buffer()[0] += 1.0;
  for (auto* n : order) {
    if (n->leaf || !n->backward) continue;
    n->backward(n->grad, n->value);
  }
  for (auto* n : order) {
    if (!n->leaf) {
      n->grad.clear();
      n->grad.shrink_to_fit();
    }
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Tensor record_op(const char* op_name, Shape shape, std::vector<double> values,
                 const std::vector<Tensor>& inputs, BackwardFn backward) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op_name) + ": non-finite value in forward result");
    }
  }
  Tensor out(std::move(shape), std::move(values), false);
  auto& node = *out.node_;
  node.leaf = false;
  node.op = op_name;
  if (!g_grad_enabled) return out;
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (!any) return out;
  node.requires_grad = true;
  node.parents.reserve(inputs.size());
  for (const auto& in : inputs) node.parents.push_back(in.node());
  node.backward = std::move(backward);
  return out;
}

std::span<double> grad_sink(const Tensor& t) {
  if (!t.requires_grad()) return {};
  return t.node()->grad_buffer();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2, "matmul: operands must be matrices");
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  if (b.extent(0) != k) {
    throw DimensionError("matmul: inner extents differ " + shape_string(a.shape()) + " · " +
                         shape_string(b.shape()));
  }
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() =
      ConstMap(a.values().data(), m, k) * ConstMap(b.values().data(), k, n);
  return record_op("matmul", {m, n}, std::move(out), {a, b},
                   [a, b, m, k, n](std::span<const double> g, std::span<const double>) {
                     ConstMap G(g.data(), m, n);
                     if (auto ga = grad_sink(a); !ga.empty()) {
                       MutMap(ga.data(), m, k).noalias() +=
                           G * ConstMap(b.values().data(), k, n).transpose();
                     }
                     if (auto gb = grad_sink(b); !gb.empty()) {
                       MutMap(gb.data(), k, n).noalias() +=
                           ConstMap(a.values().data(), m, k).transpose() * G;
                     }
                   });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return record_op("add", a.shape(), std::move(out), {a, b},
                   [a, b](std::span<const double> g, std::span<const double>) {
                     if (auto ga = grad_sink(a); !ga.empty())
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                     if (auto gb = grad_sink(b); !gb.empty())
                       for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                   });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return record_op("sub", a.shape(), std::move(out), {a, b},
                   [a, b](std::span<const double> g, std::span<const double>) {
                     if (auto ga = grad_sink(a); !ga.empty())
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                     if (auto gb = grad_sink(b); !gb.empty())
                       for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                   });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return record_op("hadamard", a.shape(), std::move(out), {a, b},
                   [a, b](std::span<const double> g, std::span<const double>) {
                     if (auto ga = grad_sink(a); !ga.empty()) {
                       auto bv = b.values();
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
                     }
                     if (auto gb = grad_sink(b); !gb.empty()) {
                       auto av = a.values();
                       for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
                     }
                   });
}

Tensor scale(const Tensor& x, double alpha) {
  return unary("scale", x, [alpha](double v) { return alpha * v; },
               [alpha](double, double) { return alpha; });
}

Tensor add_scalar(const Tensor& x, double c) {
  return unary("add_scalar", x, [c](double v) { return v + c; },
               [](double, double) { return 1.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary("tanh", x, [](double v) { return std::tanh(v); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor abs(const Tensor& x) {
  return unary("abs", x, [](double v) { return std::abs(v); },
               [](double v, double) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& x) {
  return unary("square", x, [](double v) { return v * v; },
               [](double v, double) { return 2.0 * v; });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  return record_op("sum", {1}, {total}, {x}, [x](std::span<const double> g, std::span<const double>) {
    if (auto gx = grad_sink(x); !gx.empty())
      for (auto& v : gx) v += g[0];
  });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.size());
  double total = 0.0;
  for (double v : x.values()) total += v;
  return record_op("mean", {1}, {total / n}, {x},
                   [x, n](std::span<const double> g, std::span<const double>) {
                     if (auto gx = grad_sink(x); !gx.empty())
                       for (auto& v : gx) v += g[0] / n;
                   });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sa.size() != sb.size() || !std::equal(sa.begin(), sa.end() - 1, sb.begin())) {
    throw DimensionError("concat_channels: leading extents differ " + shape_string(sa) + " vs " +
                         shape_string(sb));
  }
  const std::size_t rows = leading_size(sa);
  const std::size_t ca = sa.back(), cb = sb.back(), c = ca + cb;
  std::vector<double> out(rows * c);
  auto av = a.values(), bv = b.values();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data() + r * ca, ca, out.data() + r * c);
    std::copy_n(bv.data() + r * cb, cb, out.data() + r * c + ca);
  }
  Shape shape = sa;
  shape.back() = c;
  return record_op("concat_channels", std::move(shape), std::move(out), {a, b},
                   [a, b, rows, ca, cb, c](std::span<const double> g, std::span<const double>) {
                     if (auto ga = grad_sink(a); !ga.empty())
                       for (std::size_t r = 0; r < rows; ++r)
                         for (std::size_t j = 0; j < ca; ++j) ga[r * ca + j] += g[r * c + j];
                     if (auto gb = grad_sink(b); !gb.empty())
                       for (std::size_t r = 0; r < rows; ++r)
                         for (std::size_t j = 0; j < cb; ++j) gb[r * cb + j] += g[r * c + ca + j];
                   });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sa.size() != sb.size() || !std::equal(sa.begin() + 1, sa.end(), sb.begin() + 1)) {
    throw DimensionError("concat_rows: trailing extents differ " + shape_string(sa) + " vs " +
                         shape_string(sb));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  out.insert(out.end(), b.values().begin(), b.values().end());
  Shape shape = sa;
  shape[0] += sb[0];
  const std::size_t na = a.size();
  return record_op("concat_rows", std::move(shape), std::move(out), {a, b},
                   [a, b, na](std::span<const double> g, std::span<const double>) {
                     if (auto ga = grad_sink(a); !ga.empty())
                       for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
                     if (auto gb = grad_sink(b); !gb.empty())
                       for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[na + i];
                   });
}

Tensor segment_reduce(const Tensor& x, std::span<const std::size_t> segment_of,
                      std::size_t num_segments, ReduceMode mode) {
  const std::size_t rows = x.extent(0);
  if (segment_of.size() != rows) {
    throw DimensionError("segment_reduce: map covers " + std::to_string(segment_of.size()) +
                         " rows, tensor has " + std::to_string(rows));
  }
  std::vector<std::size_t> counts(num_segments, 0);
  for (auto s : segment_of) {
    if (s >= num_segments) throw PartitionError("segment_reduce: segment id out of range");
    ++counts[s];
  }
  for (std::size_t s = 0; s < num_segments; ++s) {
    if (counts[s] == 0) throw PartitionError("segment_reduce: segment " + std::to_string(s) + " is empty");
  }
  const std::size_t width = trailing_size(x.shape());
  auto xv = x.values();
  std::vector<double> out(num_segments * width, 0.0);
  // For max: index of the winning source row per output element.
  std::vector<std::size_t> argmax;
  if (mode == ReduceMode::max) {
    argmax.assign(out.size(), rows);
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t s = segment_of[i];
      for (std::size_t j = 0; j < width; ++j) {
        auto& slot = argmax[s * width + j];
        if (slot == rows || xv[i * width + j] > out[s * width + j]) {
          slot = i;
          out[s * width + j] = xv[i * width + j];
        }
      }
    }
  } else {
    // Running mean: exact when every row of a segment holds the same value.
    std::vector<std::size_t> seen(num_segments, 0);
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t s = segment_of[i];
      const double k = static_cast<double>(++seen[s]);
      for (std::size_t j = 0; j < width; ++j) {
        double& m = out[s * width + j];
        m += (xv[i * width + j] - m) / k;
      }
    }
  }
  Shape shape = x.shape();
  shape[0] = num_segments;
  std::vector<std::size_t> seg(segment_of.begin(), segment_of.end());
  return record_op(
      mode == ReduceMode::max ? "segment_max" : "segment_mean", std::move(shape), std::move(out),
      {x},
      [x, seg = std::move(seg), counts = std::move(counts), argmax = std::move(argmax), width,
       mode](std::span<const double> g, std::span<const double>) {
        auto gx = grad_sink(x);
        if (gx.empty()) return;
        if (mode == ReduceMode::max) {
          for (std::size_t k = 0; k < g.size(); ++k) {
            gx[argmax[k] * width + k % width] += g[k];
          }
        } else {
          for (std::size_t i = 0; i < seg.size(); ++i) {
            const double inv = 1.0 / static_cast<double>(counts[seg[i]]);
            for (std::size_t j = 0; j < width; ++j) gx[i * width + j] += g[seg[i] * width + j] * inv;
          }
        }
      });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> index) {
  const std::size_t rows = x.extent(0);
  const std::size_t width = trailing_size(x.shape());
  if (index.empty()) throw DimensionError("gather_rows: empty index");
  std::vector<double> out(index.size() * width);
  auto xv = x.values();
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= rows) throw DimensionError("gather_rows: index out of range");
    std::copy_n(xv.data() + index[i] * width, width, out.data() + i * width);
  }
  Shape shape = x.shape();
  shape[0] = index.size();
  std::vector<std::size_t> idx(index.begin(), index.end());
  return record_op("gather_rows", std::move(shape), std::move(out), {x},
                   [x, idx = std::move(idx), width](std::span<const double> g,
                                                    std::span<const double>) {
                     auto gx = grad_sink(x);
                     if (gx.empty()) return;
                     for (std::size_t i = 0; i < idx.size(); ++i)
                       for (std::size_t j = 0; j < width; ++j) gx[idx[i] * width + j] += g[i * width + j];
                   });
}

Tensor layer_norm(const Tensor& h, const Tensor& gain, const Tensor& bias) {
  const std::size_t c = h.shape().back();
  if (gain.shape() != Shape{c} || bias.shape() != Shape{c}) {
    throw DimensionError("layer_norm: gain/bias must have shape [" + std::to_string(c) + "]");
  }
  const std::size_t rows = leading_size(h.shape());
  auto hv = h.values(), gv = gain.values(), bv = bias.values();
  std::vector<double> normalized(hv.size()), inv_std(rows), out(hv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = hv.data() + r * c;
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += row[j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(c);
    inv_std[r] = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::size_t j = 0; j < c; ++j) {
      normalized[r * c + j] = (row[j] - mu) * inv_std[r];
      out[r * c + j] = normalized[r * c + j] * gv[j] + bv[j];
    }
  }
  return record_op(
      "layer_norm", h.shape(), std::move(out), {h, gain, bias},
      [h, gain, bias, rows, c, normalized = std::move(normalized), inv_std = std::move(inv_std)](
          std::span<const double> g, std::span<const double>) {
        if (auto gg = grad_sink(gain); !gg.empty())
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < c; ++j) gg[j] += g[r * c + j] * normalized[r * c + j];
        if (auto gb = grad_sink(bias); !gb.empty())
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < c; ++j) gb[j] += g[r * c + j];
        auto gh = grad_sink(h);
        if (gh.empty()) return;
        auto gv = gain.values();
        const double inv_c = 1.0 / static_cast<double>(c);
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_dy = 0.0, mean_dy_xhat = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            const double dy = g[r * c + j] * gv[j];
            mean_dy += dy;
            mean_dy_xhat += dy * normalized[r * c + j];
          }
          mean_dy *= inv_c;
          mean_dy_xhat *= inv_c;
          for (std::size_t j = 0; j < c; ++j) {
            const double dy = g[r * c + j] * gv[j];
            gh[r * c + j] += inv_std[r] * (dy - mean_dy - normalized[r * c + j] * mean_dy_xhat);
          }
        }
      });
}

Tensor linear(const Tensor& x, const Tensor& weight) {
  if (weight.rank() != 2) throw DimensionError("linear: weight must be a matrix");
  const std::size_t in = weight.extent(1), out_c = weight.extent(0);
  if (x.shape().back() != in) {
    throw DimensionError("linear: input width " + std::to_string(x.shape().back()) +
                         " does not match weight " + shape_string(weight.shape()));
  }
  const std::size_t rows = leading_size(x.shape());
  std::vector<double> out(rows * out_c);
  MutMap(out.data(), rows, out_c).noalias() =
      ConstMap(x.values().data(), rows, in) * ConstMap(weight.values().data(), out_c, in).transpose();
  Shape shape = x.shape();
  shape.back() = out_c;
  return record_op("linear", std::move(shape), std::move(out), {x, weight},
                   [x, weight, rows, in, out_c](std::span<const double> g, std::span<const double>) {
                     ConstMap G(g.data(), rows, out_c);
                     if (auto gx = grad_sink(x); !gx.empty())
                       MutMap(gx.data(), rows, in).noalias() +=
                           G * ConstMap(weight.values().data(), out_c, in);
                     if (auto gw = grad_sink(weight); !gw.empty())
                       MutMap(gw.data(), out_c, in).noalias() +=
                           G.transpose() * ConstMap(x.values().data(), rows, in);
                   });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  const std::size_t c = x.shape().back();
  if (bias.shape() != Shape{c}) {
    throw DimensionError("add_bias: bias " + shape_string(bias.shape()) + " does not match width " +
                         std::to_string(c));
  }
  auto xv = x.values(), bv = bias.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + bv[i % c];
  return record_op("add_bias", x.shape(), std::move(out), {x, bias},
                   [x, bias, c](std::span<const double> g, std::span<const double>) {
                     if (auto gx = grad_sink(x); !gx.empty())
                       for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                     if (auto gb = grad_sink(bias); !gb.empty())
                       for (std::size_t i = 0; i < g.size(); ++i) gb[i % c] += g[i];
                   });
}

}  // namespace stunet
