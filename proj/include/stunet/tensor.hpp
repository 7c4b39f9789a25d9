#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace stunet {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {
struct TapeNode;
}

// Dense row-major array of doubles with an optional handle into the
// differentiation tape. Copies share storage: a Tensor is a handle, and
// parameters are updated in place through mutable_values().
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor vector(std::initializer_list<double> values, bool requires_grad = false);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                       bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> values() const;
  // Only leaves (tensors not produced by a recorded op) may be written.
  std::span<double> mutable_values();
  double item() const;
  double operator[](std::size_t flat_index) const { return values()[flat_index]; }
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  bool is_leaf() const;
  // Empty until a backward pass reaches this tensor.
  std::span<const double> grad() const;
  void zero_grad();

  // Value copy detached from any tape.
  Tensor detach() const;
  Tensor clone(bool requires_grad = false) const;

  // Reverse-mode accumulation from this scalar into every reachable
  // requires_grad tensor. Leaf gradients accumulate across calls.
  void backward() const;

  const std::shared_ptr<detail::TapeNode>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TapeNode> node) : node_(std::move(node)) {}
  friend Tensor record_op(const char*, Shape, std::vector<double>, const std::vector<Tensor>&,
                          std::function<void(std::span<const double>, std::span<const double>)>);

  std::shared_ptr<detail::TapeNode> node_;
};

// Disables tape recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

using BackwardFn = std::function<void(std::span<const double> out_grad,
                                      std::span<const double> out_value)>;

// Builds the result of a differentiable operation. The backward callback
// receives the output gradient and value and must push contributions into
// the inputs through grad_sink(). Throws NumericError on non-finite output.
Tensor record_op(const char* op_name, Shape shape, std::vector<double> values,
                 const std::vector<Tensor>& inputs, BackwardFn backward);

// Gradient buffer of `t` for accumulation, or an empty span if `t` does not
// take part in differentiation.
std::span<double> grad_sink(const Tensor& t);

enum class ReduceMode { max, mean };

Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double alpha);
Tensor add_scalar(const Tensor& x, double c);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor square(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Concatenation along the last axis; all leading extents must agree.
Tensor concat_channels(const Tensor& a, const Tensor& b);
// Concatenation along axis 0; all trailing extents must agree.
Tensor concat_rows(const Tensor& a, const Tensor& b);

// Reduces rows (axis 0) into segments. segment_of[i] names the segment of
// row i; every segment in [0, num_segments) must be hit. Max routes the
// gradient to the lowest-index row attaining the maximum.
Tensor segment_reduce(const Tensor& x, std::span<const std::size_t> segment_of,
                      std::size_t num_segments, ReduceMode mode);

// out[i] = x[index[i]] along axis 0; backward scatter-adds.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> index);

// Normalizes over the last axis (population variance, eps 1e-5), then
// applies gain and bias of that axis' length.
Tensor layer_norm(const Tensor& h, const Tensor& gain, const Tensor& bias);
inline constexpr double kLayerNormEps = 1e-5;

// x[..., in] · weightᵀ with weight shaped [out × in].
Tensor linear(const Tensor& x, const Tensor& weight);
// Adds bias[c] to every x[..., c].
Tensor add_bias(const Tensor& x, const Tensor& bias);

}  // namespace stunet
