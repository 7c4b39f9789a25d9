#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "stunet/graph.hpp"
#include "stunet/partition.hpp"
#include "stunet/recurrent.hpp"
#include "stunet/sampling.hpp"

namespace stunet {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct STUNetConfig {
  std::size_t order = 3;       // K
  std::size_t pool_level = 2;  // p
  std::size_t dilation = 2;    // s
  // Widths of the three encoder layers; the decoder uses the last.
  std::vector<std::size_t> hidden{64, 64, 64};
  ReduceMode pool_mode = ReduceMode::max;
  UnpoolMode unpool = UnpoolMode::direct_copy;
  bool layer_norm = true;
  std::size_t input_length = 12;  // J
  std::size_t horizon = 12;       // H
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  std::uint64_t seed = 0;
  bool lambda_max_two = false;

  // Throws ModelError naming the offending field.
  void validate() const;
  KeyValues to_pairs() const;
  // Returns false for keys this struct does not own; throws UsageError on
  // a malformed value.
  bool set(const std::string& key, const std::string& value);

  std::size_t decoder_hidden() const { return hidden.back(); }
};

enum class Variant { gcgru, t_unet, s_unet, st_unet };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);
STUNetConfig variant(const STUNetConfig& cfg, Variant which);

struct ForwardOptions {
  const Sequence* targets = nullptr;
  double sampling_probability = 0.0;
  std::mt19937_64* rng = nullptr;
};

class STUNet {
 public:
  STUNet(const STUNetConfig& config, const Graph& graph);

  // inputs: J tensors [N × D_in] or [N × B × D_in]; returns H predictions.
  Sequence forward(const Sequence& inputs, const ForwardOptions& options = {}) const;

  const STUNetConfig& config() const { return config_; }
  const PartitionMap& partition() const { return partition_; }
  const GraphLaplacian& laplacian(std::size_t level) const { return laps_.at(level); }
  std::size_t num_nodes() const { return laps_.front().num_nodes(); }
  // p = 0 and s = 1: three stacked GCGRU layers without pooling or skips.
  bool plain() const { return plain_; }

  // Registration order is fixed; names are unique.
  const std::vector<NamedTensor>& parameters() const { return params_; }
  std::vector<Tensor> parameter_tensors() const;
  std::size_t parameter_count() const;

  // Copies values into the registered parameters; LoadError on any name or
  // shape disagreement.
  void load_parameters(const std::vector<NamedTensor>& values);

  const GCGRUWeights& encoder(std::size_t layer) const { return encoders_.at(layer); }
  const GCGRUWeights& decoder() const { return decoder_; }
  const ChebKernel& readout() const { return readout_; }
  const Tensor& readout_bias() const { return readout_bias_; }

 private:
  Tensor apply_readout(const Tensor& h) const;

  STUNetConfig config_;
  bool plain_ = false;
  PartitionMap partition_;
  std::vector<GraphLaplacian> laps_;  // index = partition level
  std::vector<GCGRUWeights> encoders_;
  GCGRUWeights decoder_;
  UnpoolStrategy unpool_;
  Tensor reconcile_;  // [h1 × (h1 + h0)]
  ChebKernel readout_;
  Tensor readout_bias_;
  std::vector<NamedTensor> params_;
};

// 0.5 · (mean|pred − target| + mean (pred − target)²) over all entries.
Tensor forecast_loss(const Sequence& pred, const Sequence& target);

// Binary container: "STUN", u32 version, length-prefixed key=value block,
// then (name, rank, extents, little-endian doubles) per parameter.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  STUNetConfig config;
  KeyValues extra;  // keys the model config does not own
  std::vector<NamedTensor> parameters;

  const std::string* find(const std::string& key) const;
};

void save_checkpoint(const std::filesystem::path& path, const STUNet& model,
                     const KeyValues& extra = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace stunet
