#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "stunet/tensor.hpp"

namespace stunet {

struct AdamHyper {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamHyper hyper;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

// One bias-corrected Adam update of `params` in place. Moment buffers are
// sized on the first call and checked against parameter shapes afterwards.
void adam_step(std::span<Tensor> params, std::span<const std::vector<double>> grads,
               AdamState& state);

// Same update using the gradients accumulated on the parameters themselves;
// parameters that were never reached by backward count as zero gradient.
void adam_step(std::span<Tensor> params, AdamState& state);

// Uniform in ±sqrt(6 / (fan_in + fan_out)). For rank ≥ 2 the last two axes
// are [fan_out × fan_in] and leading axes multiply both fans.
Tensor glorot_init(const Shape& shape, std::uint64_t seed, bool requires_grad = true);

double glorot_bound(const Shape& shape);

// Per-parameter seed: splitmix64 of the model seed xor FNV-1a of the name,
// so adding a parameter never shifts the initialization of the others.
std::uint64_t parameter_seed(std::uint64_t seed, std::string_view name);

std::uint64_t fnv1a(std::string_view text);

}  // namespace stunet
