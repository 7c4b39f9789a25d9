#include "stunet/recurrent.hpp"

#include <cmath>

#include "stunet/adam.hpp"
#include "stunet/errors.hpp"

namespace stunet {

GCGRUWeights GCGRUWeights::create(std::size_t order, std::size_t input_size,
                                  std::size_t hidden_size, bool layer_norm, std::uint64_t seed,
                                  const std::string& prefix) {
  if (order == 0 || input_size == 0 || hidden_size == 0) {
    throw UsageError("GCGRU sizes must be positive");
  }
  auto kernel = [&](const char* name, std::size_t in) {
    return ChebKernel{glorot_init({order, hidden_size, in}, parameter_seed(seed, prefix + "." + name))};
  };
  GCGRUWeights w;
  w.w_z = kernel("w_z", input_size);
  w.w_r = kernel("w_r", input_size);
  w.w_h = kernel("w_h", input_size);
  w.u_z = kernel("u_z", hidden_size);
  w.u_r = kernel("u_r", hidden_size);
  w.u_h = kernel("u_h", hidden_size);
  w.b_z = Tensor({hidden_size}, 0.0, true);
  w.b_r = Tensor({hidden_size}, 0.0, true);
  w.b_h = Tensor({hidden_size}, 0.0, true);
  w.layer_norm = layer_norm;
  if (layer_norm) {
    w.ln_gain = Tensor({hidden_size}, 1.0, true);
    w.ln_bias = Tensor({hidden_size}, 0.0, true);
  }
  return w;
}

std::vector<NamedTensor> GCGRUWeights::parameters(const std::string& prefix) const {
  std::vector<NamedTensor> out{
      {prefix + ".w_z", w_z.theta}, {prefix + ".w_r", w_r.theta}, {prefix + ".w_h", w_h.theta},
      {prefix + ".u_z", u_z.theta}, {prefix + ".u_r", u_r.theta}, {prefix + ".u_h", u_h.theta},
      {prefix + ".b_z", b_z},       {prefix + ".b_r", b_r},       {prefix + ".b_h", b_h}};
  if (layer_norm) {
    out.emplace_back(prefix + ".ln_gain", ln_gain);
    out.emplace_back(prefix + ".ln_bias", ln_bias);
  }
  return out;
}

Tensor zero_state(const Tensor& x, std::size_t hidden_size) {
  Shape shape = x.shape();
  shape.back() = hidden_size;
  return Tensor(shape, 0.0);
}

GateTrace gcgru_cell_traced(const GCGRUWeights& w, const GraphLaplacian& lap, const Tensor& x,
                            const Tensor& h_prev) {
  const std::size_t dh = w.hidden_size();
  if (x.shape().back() != w.input_size() || h_prev.shape().back() != dh ||
      x.rank() != h_prev.rank() || x.extent(0) != lap.num_nodes()) {
    throw DimensionError("gcgru_cell: input " + shape_string(x.shape()) + " / state " +
                         shape_string(h_prev.shape()) + " do not match D_x=" +
                         std::to_string(w.input_size()) + ", D_h=" + std::to_string(dh) +
                         ", N=" + std::to_string(lap.num_nodes()));
  }
  for (std::size_t a = 0; a + 1 < x.rank(); ++a) {
    if (x.extent(a) != h_prev.extent(a)) throw DimensionError("gcgru_cell: input and state disagree");
  }
  // cheb(W, x) + cheb(U, h) = cheb([W U], [x h]) shares one Chebyshev basis.
  auto xh = concat_channels(x, h_prev);
  GateTrace t;
  t.z = sigmoid(add_bias(cheb_conv(concat_channels(w.w_z.theta, w.u_z.theta), lap, xh), w.b_z));
  t.r = sigmoid(add_bias(cheb_conv(concat_channels(w.w_r.theta, w.u_r.theta), lap, xh), w.b_r));
  auto xrh = concat_channels(x, hadamard(t.r, h_prev));
  t.candidate =
      tanh(add_bias(cheb_conv(concat_channels(w.w_h.theta, w.u_h.theta), lap, xrh), w.b_h));
  // z⊙h_prev + (1−z)⊙h′
  t.h = add(t.candidate, hadamard(t.z, sub(h_prev, t.candidate)));
  if (w.layer_norm) t.h = layer_norm(t.h, w.ln_gain, w.ln_bias);
  return t;
}

Tensor gcgru_cell(const GCGRUWeights& w, const GraphLaplacian& lap, const Tensor& x,
                  const Tensor& h_prev) {
  return gcgru_cell_traced(w, lap, x, h_prev).h;
}

Sequence dilated_layer_forward(const GCGRUWeights& w, const GraphLaplacian& lap,
                               const Sequence& inputs, std::size_t dilation,
                               const Tensor& initial) {
  if (inputs.empty()) throw UsageError("dilated_layer_forward: empty input sequence");
  if (dilation == 0) throw UsageError("dilated_layer_forward: dilation must be at least 1");
  const Tensor h0 = initial.defined() ? initial : zero_state(inputs[0], w.hidden_size());
  Sequence out;
  out.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Tensor& prev = t >= dilation ? out[t - dilation] : h0;
    out.push_back(gcgru_cell(w, lap, inputs[t], prev));
  }
  return out;
}

Encoding encode(std::span<const EncoderLevel> levels, const Sequence& inputs) {
  if (inputs.empty()) throw UsageError("encode: empty input sequence");
  Encoding enc;
  Sequence current = inputs;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& level = levels[l];
    if (level.pool) current = st_pool_spatial(current, *level.pool, level.pool_mode);
    if (current[0].extent(0) != level.lap->num_nodes() ||
        current[0].shape().back() != level.weights->input_size()) {
      throw ModelError("encode: level " + std::to_string(l) + " receives " +
                       shape_string(current[0].shape()) + " but expects N=" +
                       std::to_string(level.lap->num_nodes()) +
                       ", D=" + std::to_string(level.weights->input_size()));
    }
    current = dilated_layer_forward(*level.weights, *level.lap, current, level.dilation);
    enc.final_states.push_back(current.back());
    enc.outputs.push_back(current);
  }
  return enc;
}

Sequence decode(const GCGRUWeights& w, const GraphLaplacian& lap, const Tensor& initial_state,
                const Tensor& go, const Readout& readout, const DecodeOptions& options) {
  if (options.horizon == 0) throw UsageError("decode: horizon must be at least 1");
  const bool sampling = options.sampling_probability > 0.0;
  if (sampling && (!options.targets || !options.rng)) {
    throw UsageError("decode: teacher forcing requires targets and a random source");
  }
  if (sampling && options.targets->size() < options.horizon) {
    throw UsageError("decode: fewer targets than horizon steps");
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Sequence predictions;
  predictions.reserve(options.horizon);
  Tensor h = initial_state;
  Tensor input = go;
  for (std::size_t i = 0; i < options.horizon; ++i) {
    h = gcgru_cell(w, lap, input, h);
    predictions.push_back(readout(h));
    input = predictions.back();
    if (sampling && i + 1 < options.horizon && coin(*options.rng) < options.sampling_probability) {
      input = (*options.targets)[i];
    }
  }
  return predictions;
}

double sampling_probability(std::uint64_t iteration, double tau) {
  return tau / (tau + std::exp(static_cast<double>(iteration) / tau));
}

}  // namespace stunet
