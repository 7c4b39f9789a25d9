#include "stunet/partition.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "stunet/errors.hpp"

namespace stunet {

PartitionMap::PartitionMap(Graph base, std::vector<PartitionLevel> levels)
    : base_(std::move(base)), levels_(std::move(levels)) {
  std::size_t prev = base_.num_nodes();
  for (const auto& lvl : levels_) {
    if (lvl.assignment.size() != prev) throw PartitionError("level map does not cover previous level");
    if (lvl.members.size() != lvl.coarse.num_nodes()) {
      throw PartitionError("member lists do not match coarse graph size");
    }
    prev = lvl.coarse.num_nodes();
  }
}

const Graph& PartitionMap::graph(std::size_t k) const {
  if (k == 0) return base_;
  return levels_.at(k - 1).coarse;
}

std::vector<std::size_t> PartitionMap::composed(std::size_t k) const {
  if (k > levels_.size()) throw UsageError("partition level out of range");
  std::vector<std::size_t> map(base_.num_nodes());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = i;
  for (std::size_t l = 0; l < k; ++l)
    for (auto& s : map) s = levels_[l].assignment[s];
  return map;
}

std::string PartitionMap::to_text() const {
  std::ostringstream os;
  for (std::size_t k = 1; k <= levels_.size(); ++k) {
    const auto map = composed(k);
    for (std::size_t i = 0; i < map.size(); ++i) {
      os << "level " << k << ": node " << i << " -> super " << map[i] << '\n';
    }
  }
  return os.str();
}

Matching max_weight_matching_path(std::span<const Edge> path) {
  const std::size_t m = path.size();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const auto& a = path[i];
    const auto& b = path[i + 1];
    const int shared = (a.u == b.u) + (a.u == b.v) + (a.v == b.u) + (a.v == b.v);
    if (shared != 1) throw UsageError("max_weight_matching_path: edges do not form a path");
  }
  // best[i]: optimum over the first i edges. Edge i is taken only on a
  // strict improvement, so ties keep fewer and earlier edges.
  std::vector<double> best(m + 1, 0.0);
  std::vector<bool> take(m + 1, false);
  for (std::size_t i = 1; i <= m; ++i) {
    const double with = (i >= 2 ? best[i - 2] : 0.0) + path[i - 1].weight;
    take[i] = with > best[i - 1];
    best[i] = take[i] ? with : best[i - 1];
  }
  Matching out;
  for (std::size_t i = m; i >= 1;) {
    if (take[i]) {
      out.edges.push_back(path[i - 1]);
      out.total_weight += path[i - 1].weight;
      if (i < 2) break;
      i -= 2;
    } else {
      --i;
    }
  }
  std::reverse(out.edges.begin(), out.edges.end());
  return out;
}

Matching path_grow_select(const Graph& g) {
  const std::size_t n = g.num_nodes();
  Eigen::MatrixXd work = g.weights();
  std::vector<bool> matched(n, false);
  Matching result;

  auto has_edges = [&](std::size_t v) {
    for (std::size_t u = 0; u < n; ++u)
      if (work(v, u) > 0.0) return true;
    return false;
  };
  auto add = [&](const Edge& e) {
    matched[e.u] = matched[e.v] = true;
    result.edges.push_back(e);
    result.total_weight += e.weight;
  };

  for (;;) {
    std::size_t start = n;
    for (std::size_t v = 0; v < n && start == n; ++v)
      if (has_edges(v)) start = v;
    if (start == n) break;

    std::vector<Edge> path;
    std::size_t v = start;
    while (has_edges(v)) {
      std::size_t next = n;
      for (std::size_t u = 0; u < n; ++u) {
        if (work(v, u) > 0.0 && (next == n || work(v, u) > work(v, next))) next = u;
      }
      path.push_back({std::min(v, next), std::max(v, next), work(v, next)});
      work.row(v).setZero();
      work.col(v).setZero();
      v = next;
    }
    for (const auto& e : max_weight_matching_path(path).edges) add(e);
  }

  // Extend to a maximal matching: heaviest edges first, then (u, v) order.
  auto edges = g.edges();
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& a, const Edge& b) { return a.weight > b.weight; });
  for (const auto& e : edges) {
    if (!matched[e.u] && !matched[e.v]) add(e);
  }
  return result;
}

bool is_valid_matching(const Graph& g, const Matching& m) {
  std::vector<bool> used(g.num_nodes(), false);
  for (const auto& e : m.edges) {
    if (e.u >= g.num_nodes() || e.v >= g.num_nodes() || e.u == e.v) return false;
    if (g.weight(e.u, e.v) <= 0.0) return false;
    if (used[e.u] || used[e.v]) return false;
    used[e.u] = used[e.v] = true;
  }
  return true;
}

bool is_maximal_matching(const Graph& g, const Matching& m) {
  std::vector<bool> used(g.num_nodes(), false);
  for (const auto& e : m.edges) used[e.u] = used[e.v] = true;
  for (const auto& e : g.edges())
    if (!used[e.u] && !used[e.v]) return false;
  return true;
}

PartitionLevel coarsen(const Graph& g, const Matching& m) {
  if (!is_valid_matching(g, m)) throw PartitionError("coarsen: matching is not valid on the graph");
  const std::size_t n = g.num_nodes();
  std::vector<std::size_t> partner(n, n);
  for (const auto& e : m.edges) {
    partner[e.u] = e.v;
    partner[e.v] = e.u;
  }

  PartitionLevel level;
  level.assignment.assign(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (level.assignment[i] != n) continue;
    const std::size_t id = level.members.size();
    level.assignment[i] = id;
    std::vector<std::size_t> group{i};
    if (partner[i] != n) {
      level.assignment[partner[i]] = id;
      group.push_back(partner[i]);
    }
    level.members.push_back(std::move(group));
  }

  const std::size_t coarse_n = level.members.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(coarse_n, coarse_n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t a = level.assignment[i], b = level.assignment[j];
      if (a != b) w(a, b) += g.weight(i, j);
    }
  level.coarse = Graph(std::move(w));
  return level;
}

PartitionMap multilevel_partition(const Graph& g, int levels) {
  if (levels < 1) throw UsageError("multilevel_partition: level must be at least 1");
  std::vector<PartitionLevel> stack;
  Graph current = g;
  for (int k = 0; k < levels; ++k) {
    stack.push_back(coarsen(current, path_grow_select(current)));
    current = stack.back().coarse;
  }
  return PartitionMap(g, std::move(stack));
}

std::vector<std::vector<std::vector<std::size_t>>> invert_map(const PartitionMap& pm) {
  std::vector<std::vector<std::vector<std::size_t>>> out;
  for (std::size_t k = 1; k <= pm.num_levels(); ++k) {
    const auto& lvl = pm.level(k);
    std::vector<std::vector<std::size_t>> inverse(lvl.coarse.num_nodes());
    for (std::size_t i = 0; i < lvl.assignment.size(); ++i) inverse[lvl.assignment[i]].push_back(i);
    out.push_back(std::move(inverse));
  }
  return out;
}

Matching brute_force_matching(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n > 12) throw UsageError("brute_force_matching is limited to N <= 12");
  std::vector<bool> used(n, false);
  std::vector<Edge> current;
  Matching best;
  std::function<void(std::size_t, double)> search = [&](std::size_t i, double weight) {
    while (i < n && used[i]) ++i;
    if (i >= n) {
      if (weight > best.total_weight) best = {current, weight};
      return;
    }
    used[i] = true;
    search(i + 1, weight);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (used[j] || g.weight(i, j) <= 0.0) continue;
      used[j] = true;
      current.push_back({i, j, g.weight(i, j)});
      search(i + 1, weight + g.weight(i, j));
      current.pop_back();
      used[j] = false;
    }
    used[i] = false;
  };
  search(0, 0.0);
  return best;
}

}  // namespace stunet
