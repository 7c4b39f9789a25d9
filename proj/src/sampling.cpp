#include "stunet/sampling.hpp"

#include <algorithm>

#include "stunet/adam.hpp"
#include "stunet/errors.hpp"

namespace stunet {

std::string to_string(UnpoolMode mode) {
  switch (mode) {
    case UnpoolMode::direct_copy: return "direct_copy";
    case UnpoolMode::ordered_deconv: return "ordered_deconv";
    case UnpoolMode::weighted_deconv: return "weighted_deconv";
  }
  return "unknown";
}

UnpoolMode parse_unpool_mode(const std::string& name) {
  if (name == "direct_copy") return UnpoolMode::direct_copy;
  if (name == "ordered_deconv") return UnpoolMode::ordered_deconv;
  if (name == "weighted_deconv") return UnpoolMode::weighted_deconv;
  throw UsageError("unknown unpool strategy '" + name + "'");
}

std::string to_string(ReduceMode mode) { return mode == ReduceMode::max ? "max" : "mean"; }

ReduceMode parse_reduce_mode(const std::string& name) {
  if (name == "max") return ReduceMode::max;
  if (name == "mean") return ReduceMode::mean;
  throw UsageError("unknown pooling mode '" + name + "'");
}

UnpoolStrategy UnpoolStrategy::create(UnpoolMode mode, std::size_t num_levels,
                                      std::size_t channels, std::uint64_t seed) {
  UnpoolStrategy s;
  s.mode = mode;
  if (mode == UnpoolMode::direct_copy) return s;
  for (std::size_t k = 0; k < num_levels; ++k) {
    UnpoolLevelWeights w;
    for (std::size_t r = 0; r < 2; ++r) {
      w.slot[r] = glorot_init({channels, channels}, seed + 101 * k + r);
    }
    if (mode == UnpoolMode::weighted_deconv) {
      w.structural = glorot_init({channels, channels + kStructuralFeatures}, seed + 101 * k + 7);
    }
    s.levels.push_back(std::move(w));
  }
  return s;
}

Tensor g_pooling(const Tensor& x, const PartitionMap& pm, ReduceMode mode) {
  if (x.extent(0) != pm.node_count(0)) {
    throw DimensionError("g_pooling: input has " + std::to_string(x.extent(0)) +
                         " rows, partition expects " + std::to_string(pm.node_count(0)));
  }
  if (pm.num_levels() == 0) return x;
  const auto map = pm.composed();
  return segment_reduce(x, map, pm.node_count(pm.num_levels()), mode);
}

Sequence st_pool_spatial(const Sequence& seq, const PartitionMap& pm, ReduceMode mode) {
  Sequence out;
  out.reserve(seq.size());
  for (const auto& x : seq) out.push_back(g_pooling(x, pm, mode));
  return out;
}

std::vector<std::size_t> member_slots(const PartitionMap& pm, std::size_t k) {
  const auto& lvl = pm.level(k);
  const Graph& fine = pm.graph(k - 1);
  std::vector<std::size_t> slots(lvl.assignment.size(), 0);
  for (const auto& group : lvl.members) {
    std::vector<std::size_t> order = group;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = fine.degree(a), db = fine.degree(b);
      return da > db || (da == db && a < b);
    });
    for (std::size_t r = 0; r < order.size(); ++r) slots[order[r]] = r;
  }
  return slots;
}

std::vector<double> structural_features(const PartitionMap& pm, std::size_t k) {
  const auto& lvl = pm.level(k);
  const Graph& fine = pm.graph(k - 1);
  const std::size_t n = fine.num_nodes();
  std::size_t max_count = 0;
  for (std::size_t i = 0; i < n; ++i) max_count = std::max(max_count, fine.neighbor_count(i));
  std::vector<double> out(n * kStructuralFeatures);
  for (std::size_t i = 0; i < n; ++i) {
    out[i * 3 + 0] = max_count ? static_cast<double>(fine.neighbor_count(i)) / max_count : 0.0;
    out[i * 3 + 1] = fine.degree(i);
    out[i * 3 + 2] = static_cast<double>(lvl.members[lvl.assignment[i]].size());
  }
  return out;
}

namespace {

// Replicates per-node rows across the batch extents of `like`.
Tensor broadcast_nodes(const std::vector<double>& per_node, std::size_t width, const Tensor& like,
                       std::size_t rows) {
  std::size_t batch = 1;
  for (std::size_t a = 1; a + 1 < like.rank(); ++a) batch *= like.extent(a);
  std::vector<double> values;
  values.reserve(rows * batch * width);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t b = 0; b < batch; ++b)
      values.insert(values.end(), per_node.begin() + i * width, per_node.begin() + (i + 1) * width);
  Shape shape = like.shape();
  shape[0] = rows;
  shape.back() = width;
  return Tensor(shape, std::move(values));
}

Tensor unpool_level(const Tensor& x, const PartitionMap& pm, std::size_t k,
                    const UnpoolStrategy& strategy) {
  const auto& lvl = pm.level(k);
  const auto& w = strategy.levels.at(k - 1);
  const std::size_t coarse = lvl.coarse.num_nodes();
  const auto slots = member_slots(pm, k);
  // Rows [0, coarse) hold slot-0 projections, [coarse, 2·coarse) slot 1.
  auto stacked = concat_rows(linear(x, w.slot[0]), linear(x, w.slot[1]));
  std::vector<std::size_t> index(lvl.assignment.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = slots[i] * coarse + lvl.assignment[i];
  auto restored = gather_rows(stacked, index);
  if (strategy.mode != UnpoolMode::weighted_deconv) return restored;
  auto stats = broadcast_nodes(structural_features(pm, k), kStructuralFeatures, restored,
                               index.size());
  return linear(concat_channels(restored, stats), w.structural);
}

}  // namespace

Tensor unpool(const Tensor& x, const PartitionMap& pm, const UnpoolStrategy& strategy) {
  const std::size_t top = pm.num_levels();
  if (x.extent(0) != pm.node_count(top)) {
    throw DimensionError("unpool: input has " + std::to_string(x.extent(0)) +
                         " rows, coarse level has " + std::to_string(pm.node_count(top)));
  }
  if (top == 0) return x;
  switch (strategy.mode) {
    case UnpoolMode::direct_copy: {
      const auto map = pm.composed();
      return gather_rows(x, map);
    }
    case UnpoolMode::ordered_deconv:
    case UnpoolMode::weighted_deconv: {
      if (strategy.levels.size() != top) {
        throw UsageError("unpool: strategy has weights for " +
                         std::to_string(strategy.levels.size()) + " levels, partition has " +
                         std::to_string(top));
      }
      Tensor h = x;
      for (std::size_t k = top; k >= 1; --k) h = unpool_level(h, pm, k, strategy);
      return h;
    }
  }
  throw UsageError("unpool: unknown strategy");
}

Sequence st_unpool_spatial(const Sequence& seq, const PartitionMap& pm,
                           const UnpoolStrategy& strategy) {
  Sequence out;
  out.reserve(seq.size());
  for (const auto& x : seq) out.push_back(unpool(x, pm, strategy));
  return out;
}

Sequence skip_concat(const Sequence& upsampled, const Sequence& encoder_features) {
  if (encoder_features.empty()) return upsampled;
  if (upsampled.size() != encoder_features.size()) {
    throw DimensionError("skip_concat: sequence lengths differ (" +
                         std::to_string(upsampled.size()) + " vs " +
                         std::to_string(encoder_features.size()) + ")");
  }
  Sequence out;
  out.reserve(upsampled.size());
  for (std::size_t t = 0; t < upsampled.size(); ++t) {
    out.push_back(concat_channels(upsampled[t], encoder_features[t]));
  }
  return out;
}

}  // namespace stunet
