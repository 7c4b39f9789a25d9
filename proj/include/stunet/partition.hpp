#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stunet/graph.hpp"

namespace stunet {

struct Matching {
  std::vector<Edge> edges;
  double total_weight = 0.0;
};

// One coarsening step: previous-level node -> super node.
struct PartitionLevel {
  std::vector<std::size_t> assignment;
  // members[s] lists the previous-level nodes of super node s, ascending.
  std::vector<std::vector<std::size_t>> members;
  Graph coarse;
};

// Stack of coarsening levels over a base graph. Level 0 is the base graph;
// level k's nodes are the super nodes produced by the k-th coarsening.
class PartitionMap {
 public:
  PartitionMap() = default;
  PartitionMap(Graph base, std::vector<PartitionLevel> levels);

  std::size_t num_levels() const { return levels_.size(); }
  const Graph& base() const { return base_; }
  const PartitionLevel& level(std::size_t k) const { return levels_.at(k - 1); }
  // Graph at level k (0 = base).
  const Graph& graph(std::size_t k) const;
  std::size_t node_count(std::size_t k) const { return graph(k).num_nodes(); }
  // Base node -> super node id at level k, composing the per-level maps.
  std::vector<std::size_t> composed(std::size_t k) const;
  std::vector<std::size_t> composed() const { return composed(num_levels()); }

  // Text form: "level k: node i -> super j" per line.
  std::string to_text() const;

 private:
  Graph base_;
  std::vector<PartitionLevel> levels_;
};

// Edge selection of the path-growing scheme: heaviest-edge paths from the
// lowest-id vertex of positive degree, each matched optimally, then a greedy
// extension to a maximal matching.
Matching path_grow_select(const Graph& g);

// Exact maximum-weight matching on a path given as consecutive edges.
// Throws UsageError if consecutive edges do not chain through one endpoint.
Matching max_weight_matching_path(std::span<const Edge> path);

// Merges matched pairs into super nodes ordered by minimum member id and
// sums parallel edge weights. Throws PartitionError on an invalid matching.
PartitionLevel coarsen(const Graph& g, const Matching& m);

// Applies selection + coarsening `levels` times. Throws UsageError if
// levels < 1.
PartitionMap multilevel_partition(const Graph& g, int levels);

// Per level, super node -> member list (the inverse of each level's map).
std::vector<std::vector<std::vector<std::size_t>>> invert_map(const PartitionMap& pm);

// Exhaustive maximum-weight matching for N <= 12.
Matching brute_force_matching(const Graph& g);

bool is_valid_matching(const Graph& g, const Matching& m);
bool is_maximal_matching(const Graph& g, const Matching& m);

}  // namespace stunet
