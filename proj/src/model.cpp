#include "stunet/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "stunet/adam.hpp"
#include "stunet/errors.hpp"
#include "text_util.hpp"

namespace stunet {

void STUNetConfig::validate() const {
  auto fail = [](const std::string& what) { throw ModelError("invalid config: " + what); };
  if (order < 1) fail("order (K) must be at least 1");
  if (dilation < 1) fail("dilation (s) must be at least 1");
  if (input_length < 1) fail("input_length (J) must be at least 1");
  if (horizon < 1) fail("horizon (H) must be at least 1");
  if (input_dim < 1 || output_dim < 1) fail("input_dim and output_dim must be positive");
  if (hidden.size() != 3) fail("hidden must list three layer widths");
  for (auto h : hidden)
    if (h < 1) fail("hidden widths must be positive");
}

KeyValues STUNetConfig::to_pairs() const {
  return {{"order", std::to_string(order)},
          {"pool_level", std::to_string(pool_level)},
          {"dilation", std::to_string(dilation)},
          {"hidden", detail::join(hidden)},
          {"pool_mode", to_string(pool_mode)},
          {"unpool", to_string(unpool)},
          {"layer_norm", layer_norm ? "true" : "false"},
          {"input_length", std::to_string(input_length)},
          {"horizon", std::to_string(horizon)},
          {"input_dim", std::to_string(input_dim)},
          {"output_dim", std::to_string(output_dim)},
          {"seed", std::to_string(seed)},
          {"lambda_max_two", lambda_max_two ? "true" : "false"}};
}

bool STUNetConfig::set(const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "order") order = parse_unsigned(key, value);
  else if (key == "pool_level") pool_level = parse_unsigned(key, value);
  else if (key == "dilation") dilation = parse_unsigned(key, value);
  else if (key == "hidden") {
    hidden = parse_size_list(key, value);
    // A single width applies to every layer.
    if (hidden.size() == 1) hidden.assign(3, hidden[0]);
  } else if (key == "pool_mode") pool_mode = parse_reduce_mode(std::string(trim(value)));
  else if (key == "unpool") unpool = parse_unpool_mode(std::string(trim(value)));
  else if (key == "layer_norm") layer_norm = parse_bool(key, value);
  else if (key == "input_length") input_length = parse_unsigned(key, value);
  else if (key == "horizon") horizon = parse_unsigned(key, value);
  else if (key == "input_dim") input_dim = parse_unsigned(key, value);
  else if (key == "output_dim") output_dim = parse_unsigned(key, value);
  else if (key == "seed") seed = parse_unsigned(key, value);
  else if (key == "lambda_max_two") lambda_max_two = parse_bool(key, value);
  else return false;
  return true;
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::gcgru: return "GCGRU";
    case Variant::t_unet: return "T-UNet";
    case Variant::s_unet: return "S-UNet";
    case Variant::st_unet: return "ST-UNet";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "gcgru") return Variant::gcgru;
  if (lower == "t-unet" || lower == "t_unet") return Variant::t_unet;
  if (lower == "s-unet" || lower == "s_unet") return Variant::s_unet;
  if (lower == "st-unet" || lower == "st_unet") return Variant::st_unet;
  throw UsageError("unknown variant '" + name + "' (GCGRU, T-UNet, S-UNet, ST-UNet)");
}

STUNetConfig variant(const STUNetConfig& cfg, Variant which) {
  STUNetConfig out = cfg;
  if (which == Variant::gcgru || which == Variant::t_unet) out.pool_level = 0;
  if (which == Variant::gcgru || which == Variant::s_unet) out.dilation = 1;
  return out;
}

STUNet::STUNet(const STUNetConfig& config, const Graph& graph) : config_(config) {
  config_.validate();
  plain_ = config_.pool_level == 0 && config_.dilation == 1;
  partition_ = config_.pool_level > 0
                   ? multilevel_partition(graph, static_cast<int>(config_.pool_level))
                   : PartitionMap(graph, {});
  LaplacianOptions lap_opts;
  lap_opts.assume_lambda_max_two = config_.lambda_max_two;
  for (std::size_t k = 0; k <= partition_.num_levels(); ++k) {
    laps_.push_back(normalized_laplacian(partition_.graph(k), lap_opts));
  }

  const auto& h = config_.hidden;
  const std::size_t K = config_.order;
  const std::uint64_t seed = config_.seed;
  const bool ln = config_.layer_norm;
  auto add = [&](const std::vector<NamedTensor>& ps) {
    params_.insert(params_.end(), ps.begin(), ps.end());
  };

  const std::size_t in_sizes[3] = {config_.input_dim, h[0], h[1]};
  for (std::size_t l = 0; l < 3; ++l) {
    const std::string name = "encoder" + std::to_string(l);
    encoders_.push_back(GCGRUWeights::create(K, in_sizes[l], h[l], ln, seed, name));
    add(encoders_.back().parameters(name));
  }
  if (!plain_) {
    unpool_.mode = config_.unpool;
    if (config_.unpool != UnpoolMode::direct_copy) {
      for (std::size_t k = 1; k <= partition_.num_levels(); ++k) {
        const std::string name = "unpool.level" + std::to_string(k);
        UnpoolLevelWeights w;
        for (std::size_t r = 0; r < 2; ++r) {
          const std::string slot = name + ".slot" + std::to_string(r);
          w.slot[r] = glorot_init({h[1], h[1]}, parameter_seed(seed, slot));
          params_.emplace_back(slot, w.slot[r]);
        }
        if (config_.unpool == UnpoolMode::weighted_deconv) {
          const std::string s = name + ".structural";
          w.structural = glorot_init({h[1], h[1] + kStructuralFeatures}, parameter_seed(seed, s));
          params_.emplace_back(s, w.structural);
        }
        unpool_.levels.push_back(std::move(w));
      }
    }
    reconcile_ = glorot_init({h[1], h[1] + h[0]}, parameter_seed(seed, "reconcile.weight"));
    params_.emplace_back("reconcile.weight", reconcile_);
  }
  decoder_ = GCGRUWeights::create(K, config_.output_dim, h[2], ln, seed, "decoder");
  add(decoder_.parameters("decoder"));
  readout_ = make_cheb_kernel(K, config_.output_dim, h[2], parameter_seed(seed, "readout.theta"));
  readout_bias_ = Tensor({config_.output_dim}, 0.0, true);
  params_.emplace_back("readout.theta", readout_.theta);
  params_.emplace_back("readout.bias", readout_bias_);
}

std::vector<Tensor> STUNet::parameter_tensors() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& [name, t] : params_) out.push_back(t);
  return out;
}

std::size_t STUNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

void STUNet::load_parameters(const std::vector<NamedTensor>& values) {
  if (values.size() != params_.size()) {
    throw LoadError("checkpoint holds " + std::to_string(values.size()) +
                    " parameters, model expects " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& [name, dst] = params_[i];
    const auto& [src_name, src] = values[i];
    if (src_name != name) {
      throw LoadError("checkpoint parameter " + std::to_string(i) + " is '" + src_name +
                      "', model expects '" + name + "'");
    }
    if (src.shape() != dst.shape()) {
      throw LoadError("parameter '" + name + "' has shape " + shape_string(src.shape()) +
                      " in checkpoint, model expects " + shape_string(dst.shape()));
    }
    std::copy(src.values().begin(), src.values().end(), dst.mutable_values().begin());
  }
}

Tensor STUNet::apply_readout(const Tensor& h) const {
  return add_bias(cheb_conv(readout_, laps_.front(), h), readout_bias_);
}

Sequence STUNet::forward(const Sequence& inputs, const ForwardOptions& options) const {
  if (inputs.size() != config_.input_length) {
    throw DimensionError("forward: got " + std::to_string(inputs.size()) +
                         " input steps, config expects J=" + std::to_string(config_.input_length));
  }
  for (const auto& x : inputs) {
    if (x.rank() < 2 || x.extent(0) != num_nodes() || x.shape().back() != config_.input_dim) {
      throw DimensionError("forward: input step " + shape_string(x.shape()) + " does not match N=" +
                           std::to_string(num_nodes()) +
                           ", D_in=" + std::to_string(config_.input_dim));
    }
  }
  const GraphLaplacian& base = laps_.front();
  Tensor final_state;
  if (plain_) {
    const EncoderLevel levels[] = {{&encoders_[0], &base, 1, nullptr, config_.pool_mode},
                                   {&encoders_[1], &base, 1, nullptr, config_.pool_mode},
                                   {&encoders_[2], &base, 1, nullptr, config_.pool_mode}};
    final_state = encode(levels, inputs).final_states.back();
  } else {
    const std::size_t p = partition_.num_levels();
    const EncoderLevel levels[] = {
        {&encoders_[0], &base, 1, nullptr, config_.pool_mode},
        {&encoders_[1], &laps_.back(), config_.dilation, p > 0 ? &partition_ : nullptr,
         config_.pool_mode}};
    auto enc = encode(levels, inputs);
    auto fused = skip_concat(st_unpool_spatial(enc.outputs[1], partition_, unpool_), enc.outputs[0]);
    for (auto& f : fused) f = linear(f, reconcile_);
    final_state = dilated_layer_forward(encoders_[2], base, fused, 1).back();
  }

  Shape go_shape = inputs.front().shape();
  go_shape.back() = config_.output_dim;
  const Tensor go(go_shape, 0.0);
  DecodeOptions dec;
  dec.horizon = config_.horizon;
  dec.sampling_probability = options.sampling_probability;
  dec.targets = options.targets;
  dec.rng = options.rng;
  return decode(decoder_, base, final_state, go,
                [this](const Tensor& h) { return apply_readout(h); }, dec);
}

Tensor forecast_loss(const Sequence& pred, const Sequence& target) {
  if (pred.empty() || pred.size() != target.size()) {
    throw DimensionError("loss: prediction has " + std::to_string(pred.size()) +
                         " steps, target has " + std::to_string(target.size()));
  }
  Tensor l1, l2;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].shape() != target[i].shape()) {
      throw DimensionError("loss: step " + std::to_string(i) + " shapes " +
                           shape_string(pred[i].shape()) + " and " +
                           shape_string(target[i].shape()) + " differ");
    }
    auto e = sub(pred[i], target[i]);
    auto a = sum(abs(e));
    auto s = sum(square(e));
    l1 = l1.defined() ? add(l1, a) : a;
    l2 = l2.defined() ? add(l2, s) : s;
    count += e.size();
  }
  return scale(add(l1, l2), 0.5 / static_cast<double>(count));
}

}  // namespace stunet
