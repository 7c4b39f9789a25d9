#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "grad_check.hpp"
#include "stunet/errors.hpp"
#include "stunet/tensor.hpp"

using namespace stunet;
using stunet::testing::max_gradient_error;
using stunet::testing::project;
using stunet::testing::random_tensor;

namespace {

void expect_values(const Tensor& t, std::initializer_list<double> expected, double tol = 0.0) {
  ASSERT_EQ(t.size(), expected.size());
  std::size_t i = 0;
  for (double e : expected) {
    EXPECT_NEAR(t[i], e, tol) << "index " << i;
    ++i;
  }
}

}  // namespace

TEST(Tensor, ShapeMustMatchData) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor(Shape{0}), DimensionError);
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.at(1, 2), 1.5);
}

TEST(Tensor, MatmulIdentity) {
  auto eye = Tensor::matrix({{1, 0}, {0, 1}});
  auto m = Tensor::matrix({{1, 2}, {3, 4}});
  expect_values(matmul(eye, m), {1, 2, 3, 4});
}

TEST(Tensor, MatmulHandComputed) {
  auto out = matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{3}, {4}}));
  EXPECT_EQ(out.shape(), (Shape{1, 1}));
  EXPECT_EQ(out.item(), 11.0);
}

TEST(Tensor, MatmulRejectsInnerMismatch) {
  EXPECT_THROW(matmul(Tensor({2, 3}), Tensor({2, 3})), DimensionError);
}

TEST(Tensor, MatmulGradientOfSumIsOnesTimesBTransposed) {
  std::mt19937_64 rng(3);
  auto a = random_tensor({3, 4}, rng);
  auto b = random_tensor({4, 2}, rng);
  sum(matmul(a, b)).backward();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      EXPECT_NEAR(a.grad()[i * 4 + k], b[k * 2] + b[k * 2 + 1], 1e-14);
  EXPECT_LT(max_gradient_error([&] { return sum(matmul(a, b)); }, {a, b}), 1e-4);
}

TEST(Tensor, ElementwiseValues) {
  expect_values(hadamard(Tensor::vector({1, 2}), Tensor::vector({3, 4})), {3, 8});
  EXPECT_EQ(sigmoid(Tensor::scalar(0.0)).item(), 0.5);
  expect_values(add(Tensor::vector({1, 2}), Tensor::vector({3, 4})), {4, 6});
  expect_values(sub(Tensor::vector({1, 2}), Tensor::vector({3, 4})), {-2, -2});
  expect_values(scale(Tensor::vector({1, -2}), 3.0), {3, -6});
  EXPECT_THROW(add(Tensor::vector({1, 2}), Tensor::vector({1, 2, 3})), DimensionError);
  EXPECT_THROW(hadamard(Tensor({2, 1}), Tensor({1, 2})), DimensionError);
}

TEST(Tensor, TanhGradientAtZero) {
  auto x = Tensor::scalar(0.0, true);
  tanh(x).backward();
  EXPECT_NEAR(x.grad()[0], 1.0, 1e-12);
  const double h = 1e-6;
  EXPECT_NEAR(x.grad()[0], (std::tanh(h) - std::tanh(-h)) / (2 * h), 1e-6);
}

TEST(Tensor, ActivationRanges) {
  std::mt19937_64 rng(11);
  auto x = random_tensor({200}, rng, -30.0, 30.0, false);
  auto s = sigmoid(x);
  auto t = tanh(scale(x, 0.1));
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_GT(s[i], 0.0);
    EXPECT_LT(s[i], 1.0);
    EXPECT_GT(t[i], -1.0);
    EXPECT_LT(t[i], 1.0);
  }
}

TEST(Tensor, ConcatChannels) {
  auto out = concat_channels(Tensor::matrix({{1}}), Tensor::matrix({{2}}));
  expect_values(out, {1, 2});
  EXPECT_EQ(concat_channels(Tensor({3, 2}), Tensor({3, 4})).shape(), (Shape{3, 6}));
  EXPECT_THROW(concat_channels(Tensor({3, 2}), Tensor({2, 2})), DimensionError);

  auto a = Tensor({3, 2}, 0.5, true);
  auto b = Tensor({3, 4}, 0.5, true);
  sum(concat_channels(a, b)).backward();
  for (double g : a.grad()) EXPECT_EQ(g, 1.0);
  for (double g : b.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Tensor, SegmentReduceExamples) {
  std::vector<std::size_t> one{0, 0};
  expect_values(segment_reduce(Tensor::matrix({{1}, {3}}), one, 1, ReduceMode::max), {3});
  expect_values(segment_reduce(Tensor::matrix({{2}, {4}}), one, 1, ReduceMode::mean), {3});
  EXPECT_THROW(segment_reduce(Tensor::matrix({{2}, {4}}), one, 2, ReduceMode::mean),
               PartitionError);
}

TEST(Tensor, SegmentMeanOfConstantIsExact) {
  // 0.1 + 0.1 + 0.1 != 0.3 in binary; the mean must still return 0.1.
  std::vector<std::size_t> seg{0, 0, 0, 1, 1, 1, 1, 1, 1, 1};
  std::vector<double> v{0.1, 0.1, 0.1, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7};
  auto y = segment_reduce(Tensor({10, 1}, v), seg, 2, ReduceMode::mean);
  EXPECT_EQ(y[0], 0.1);
  EXPECT_EQ(y[1], 0.7);
}

TEST(Tensor, SegmentReduceSingletonIsIdentity) {
  std::mt19937_64 rng(5);
  auto x = random_tensor({6, 3}, rng, -1, 1, false);
  std::vector<std::size_t> ident{0, 1, 2, 3, 4, 5};
  for (auto mode : {ReduceMode::max, ReduceMode::mean}) {
    auto y = segment_reduce(x, ident, 6, mode);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y[i], x[i]);
  }
}

TEST(Tensor, SegmentMaxRoutesTiesToLowestRow) {
  auto x = Tensor::matrix({{2}, {2}, {1}}, true);
  std::vector<std::size_t> seg{0, 0, 0};
  sum(segment_reduce(x, seg, 1, ReduceMode::max)).backward();
  expect_values(Tensor({3}, std::vector<double>(x.grad().begin(), x.grad().end())), {1, 0, 0});
}

TEST(Tensor, LayerNormExamples) {
  auto gain = Tensor::vector({1, 1});
  auto bias = Tensor::vector({0, 0});
  auto y = layer_norm(Tensor::matrix({{1, 3}}), gain, bias);
  expect_values(y, {-1, 1}, 1e-4);
  // Hand value with the epsilon: (x - 2) / sqrt(1 + 1e-5).
  EXPECT_NEAR(y[1], 1.0 / std::sqrt(1.0 + 1e-5), 1e-15);
  expect_values(layer_norm(Tensor::matrix({{4, 4}}), gain, bias), {0, 0});
  expect_values(layer_norm(Tensor::matrix({{7}}), Tensor::vector({1}), Tensor::vector({0})), {0});
}

TEST(Tensor, BackwardExamples) {
  auto p = Tensor::vector({1, 2}, true);
  sum(p).backward();
  EXPECT_EQ(p.grad()[0], 1.0);
  EXPECT_EQ(p.grad()[1], 1.0);

  auto q = Tensor::vector({1, 2}, true);
  sum(hadamard(q, q)).backward();
  EXPECT_EQ(q.grad()[0], 2.0);
  EXPECT_EQ(q.grad()[1], 4.0);
}

TEST(Tensor, BackwardRequiresScalar) {
  auto p = Tensor::vector({1, 2}, true);
  EXPECT_THROW(scale(p, 2.0).backward(), UsageError);
}

TEST(Tensor, UnusedParameterGetsNoContribution) {
  auto used = Tensor::vector({1, 2}, true);
  auto unused = Tensor::vector({3, 4}, true);
  sum(used).backward();
  EXPECT_TRUE(unused.grad().empty() || (unused.grad()[0] == 0 && unused.grad()[1] == 0));
}

TEST(Tensor, TapeLinearity) {
  std::mt19937_64 rng(8);
  auto p = random_tensor({4}, rng);
  auto q = random_tensor({4}, rng);
  auto l1 = [&] { return sum(hadamard(tanh(p), q)); };
  auto l2 = [&] { return sum(square(sigmoid(hadamard(p, q)))); };

  add(l1(), l2()).backward();
  std::vector<double> joint_p(p.grad().begin(), p.grad().end());
  std::vector<double> joint_q(q.grad().begin(), q.grad().end());

  p.zero_grad();
  q.zero_grad();
  l1().backward();
  l2().backward();
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(p.grad()[i], joint_p[i], 1e-14);
    EXPECT_NEAR(q.grad()[i], joint_q[i], 1e-14);
  }
}

TEST(Tensor, NonFiniteForwardIsAnError) {
  auto x = Tensor::vector({1e300});
  EXPECT_THROW(square(x), NumericError);
}

TEST(Tensor, NoGradGuardSkipsRecording) {
  auto p = Tensor::vector({1, 2}, true);
  NoGradGuard guard;
  auto y = sum(p);
  EXPECT_FALSE(y.requires_grad());
}

TEST(Tensor, OnlyLeavesAreMutable) {
  auto p = Tensor::vector({1, 2}, true);
  auto y = scale(p, 2.0);
  EXPECT_THROW(y.mutable_values(), UsageError);
}

// Finite-difference checks for every differentiable op on random inputs.
class OpGradient : public ::testing::TestWithParam<int> {};

TEST_P(OpGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(100 + GetParam());
  auto a = random_tensor({3, 4}, rng);
  auto b = random_tensor({3, 4}, rng);
  auto c = random_tensor({3, 2}, rng);
  auto w = random_tensor({5, 4}, rng);
  auto bias = random_tensor({4}, rng);
  auto gain = random_tensor({4}, rng, 0.5, 1.5);
  auto m = random_tensor({4, 2}, rng);
  std::vector<std::size_t> seg{1, 0, 1};
  std::vector<std::size_t> gather{2, 0, 2, 1};

  const double tol = 1e-4;
  EXPECT_LT(max_gradient_error([&] { return project(matmul(a, m)); }, {a, m}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(add(a, b)); }, {a, b}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(sub(a, b)); }, {a, b}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(hadamard(a, b)); }, {a, b}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(scale(a, -1.7)); }, {a}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(add_scalar(a, 0.3)); }, {a}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(sigmoid(a)); }, {a}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(tanh(a)); }, {a}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(abs(a)); }, {a}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(square(a)); }, {a}), tol);
  EXPECT_LT(max_gradient_error([&] { return mean(square(a)); }, {a}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(concat_channels(a, c)); }, {a, c}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(concat_rows(a, b)); }, {a, b}), tol);
  EXPECT_LT(max_gradient_error(
                [&] { return project(segment_reduce(a, seg, 2, ReduceMode::max)); }, {a}),
            tol);
  EXPECT_LT(max_gradient_error(
                [&] { return project(segment_reduce(a, seg, 2, ReduceMode::mean)); }, {a}),
            tol);
  EXPECT_LT(max_gradient_error([&] { return project(gather_rows(a, gather)); }, {a}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(layer_norm(a, gain, bias)); }, {a, gain, bias}),
            tol);
  EXPECT_LT(max_gradient_error([&] { return project(linear(a, w)); }, {a, w}), tol);
  EXPECT_LT(max_gradient_error([&] { return project(add_bias(a, bias)); }, {a, bias}), tol);
}

INSTANTIATE_TEST_SUITE_P(RandomInputs, OpGradient, ::testing::Range(0, 5));
