#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stunet/partition.hpp"
#include "stunet/tensor.hpp"

namespace stunet {

// Time-ordered graph signals; element t is [N × C] or [N × B × C].
using Sequence = std::vector<Tensor>;

enum class UnpoolMode { direct_copy, ordered_deconv, weighted_deconv };

std::string to_string(UnpoolMode mode);
UnpoolMode parse_unpool_mode(const std::string& name);
std::string to_string(ReduceMode mode);
ReduceMode parse_reduce_mode(const std::string& name);

// Learnable weights of one unpooling level. slot[r] maps the super node
// feature to its r-th member (members ordered by degree); `structural`
// is used by weighted deconv only.
struct UnpoolLevelWeights {
  std::array<Tensor, 2> slot;
  Tensor structural;  // [C_out × (C_in + 3)]
};

struct UnpoolStrategy {
  UnpoolMode mode = UnpoolMode::direct_copy;
  // levels[k-1] restores level k to level k-1.
  std::vector<UnpoolLevelWeights> levels;

  // Glorot-initialized weights for `num_levels` levels at constant width.
  static UnpoolStrategy create(UnpoolMode mode, std::size_t num_levels, std::size_t channels,
                               std::uint64_t seed);
};

inline constexpr std::size_t kStructuralFeatures = 3;

// Pools base-level rows into the top level of `pm`, rows ordered by super
// node id.
Tensor g_pooling(const Tensor& x, const PartitionMap& pm, ReduceMode mode);

// The same map at every time step.
Sequence st_pool_spatial(const Sequence& seq, const PartitionMap& pm, ReduceMode mode);

// Restores top-level rows to the base graph.
Tensor unpool(const Tensor& x, const PartitionMap& pm, const UnpoolStrategy& strategy);

Sequence st_unpool_spatial(const Sequence& seq, const PartitionMap& pm,
                           const UnpoolStrategy& strategy);

// Per-time-step channel concatenation, encoder features last. An empty
// encoder sequence leaves `upsampled` unchanged.
Sequence skip_concat(const Sequence& upsampled, const Sequence& encoder_features);

// Slot of each level-(k-1) node inside its level-k super node: members in
// descending degree (weighted, in the finer graph), ties by lower id.
std::vector<std::size_t> member_slots(const PartitionMap& pm, std::size_t k);

// Per level-(k-1) node: [degree / max degree, incident weight, member count].
std::vector<double> structural_features(const PartitionMap& pm, std::size_t k);

}  // namespace stunet
