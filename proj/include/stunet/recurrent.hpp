#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stunet/graph.hpp"
#include "stunet/partition.hpp"
#include "stunet/sampling.hpp"
#include "stunet/tensor.hpp"

namespace stunet {

using NamedTensor = std::pair<std::string, Tensor>;

// Graph-convolutional GRU weights. W_* act on the input, U_* on the state.
struct GCGRUWeights {
  ChebKernel w_z, w_r, w_h;  // [K × D_h × D_x]
  ChebKernel u_z, u_r, u_h;  // [K × D_h × D_h]
  Tensor b_z, b_r, b_h;      // [D_h]
  bool layer_norm = false;
  Tensor ln_gain, ln_bias;   // [D_h], only with layer_norm

  std::size_t order() const { return w_z.order(); }
  std::size_t input_size() const { return w_z.in_channels(); }
  std::size_t hidden_size() const { return w_z.out_channels(); }

  // Glorot kernels seeded per name under `prefix`, zero biases, unit gain.
  static GCGRUWeights create(std::size_t order, std::size_t input_size, std::size_t hidden_size,
                             bool layer_norm, std::uint64_t seed, const std::string& prefix);

  // Fixed registration order, names prefixed.
  std::vector<NamedTensor> parameters(const std::string& prefix) const;
};

struct GateTrace {
  Tensor z, r, candidate, h;
};

// One step. x is [N × D_x] or [N × B × D_x], h_prev matches with D_h.
Tensor gcgru_cell(const GCGRUWeights& w, const GraphLaplacian& lap, const Tensor& x,
                  const Tensor& h_prev);
GateTrace gcgru_cell_traced(const GCGRUWeights& w, const GraphLaplacian& lap, const Tensor& x,
                            const Tensor& h_prev);

// Zero state shaped like `x` with D_h channels.
Tensor zero_state(const Tensor& x, std::size_t hidden_size);

// h_t = cell(x_t, h_{t-s}); steps before the start read `initial` (zeros if
// empty). Emits h_t for every t.
Sequence dilated_layer_forward(const GCGRUWeights& w, const GraphLaplacian& lap,
                               const Sequence& inputs, std::size_t dilation,
                               const Tensor& initial = {});

// One encoder level: optionally pool the incoming sequence, then run a
// dilated layer on this level's graph.
struct EncoderLevel {
  const GCGRUWeights* weights = nullptr;
  const GraphLaplacian* lap = nullptr;
  std::size_t dilation = 1;
  const PartitionMap* pool = nullptr;  // null: no pooling before this level
  ReduceMode pool_mode = ReduceMode::max;
};

struct Encoding {
  std::vector<Sequence> outputs;
  std::vector<Tensor> final_states;
};

Encoding encode(std::span<const EncoderLevel> levels, const Sequence& inputs);

// Prediction from a decoder state; the model supplies the readout layer.
using Readout = std::function<Tensor(const Tensor& state)>;

struct DecodeOptions {
  std::size_t horizon = 1;
  // Teacher-forcing probability; requires `targets` and `rng` when > 0.
  double sampling_probability = 0.0;
  const Sequence* targets = nullptr;
  std::mt19937_64* rng = nullptr;
};

// Seq2seq decoding from `initial_state`. The first step consumes `go`; later
// steps consume the previous prediction, or the previous target with
// probability sampling_probability (one draw per step).
Sequence decode(const GCGRUWeights& w, const GraphLaplacian& lap, const Tensor& initial_state,
                const Tensor& go, const Readout& readout, const DecodeOptions& options);

// Inverse-sigmoid decay τ / (τ + exp(i / τ)).
double sampling_probability(std::uint64_t iteration, double tau = 1000.0);

}  // namespace stunet
