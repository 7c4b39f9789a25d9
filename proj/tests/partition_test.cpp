#include <gtest/gtest.h>

#include <set>

#include "stunet/errors.hpp"
#include "stunet/partition.hpp"
#include "test_graphs.hpp"

using namespace stunet;
using stunet::testing::random_graph;

namespace {

Graph weighted_path(std::vector<double> w) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < w.size(); ++i) edges.push_back({i, i + 1, w[i]});
  return Graph::from_edges(w.size() + 1, edges);
}

Graph cycle(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({std::min(i, (i + 1) % n), std::max(i, (i + 1) % n), 1.0});
  return Graph::from_edges(n, edges);
}

Graph triangle() { return Graph::from_edges(3, {{0, 1, 5.0}, {1, 2, 3.0}, {0, 2, 1.0}}); }

}  // namespace

TEST(PathGrow, SingleEdge) {
  auto m = path_grow_select(Graph::from_edges(2, {{0, 1, 5.0}}));
  ASSERT_EQ(m.edges.size(), 1u);
  EXPECT_EQ(m.edges[0], (Edge{0, 1, 5.0}));
  EXPECT_EQ(m.total_weight, 5.0);
}

TEST(PathGrow, WeightedPath) {
  auto g = weighted_path({3, 1, 2});
  auto m = path_grow_select(g);
  ASSERT_EQ(m.edges.size(), 2u);
  EXPECT_EQ(m.edges[0], (Edge{0, 1, 3.0}));
  EXPECT_EQ(m.edges[1], (Edge{2, 3, 2.0}));
  EXPECT_EQ(m.total_weight, 5.0);
  EXPECT_EQ(brute_force_matching(g).total_weight, 5.0);
}

TEST(PathGrow, TriangleTakesHeaviestEdge) {
  auto m = path_grow_select(triangle());
  ASSERT_EQ(m.edges.size(), 1u);
  EXPECT_EQ(m.edges[0], (Edge{0, 1, 5.0}));
  EXPECT_EQ(brute_force_matching(triangle()).total_weight, 5.0);
}

TEST(PathGrow, EmptyGraph) {
  auto m = path_grow_select(Graph(Eigen::MatrixXd::Zero(3, 3)));
  EXPECT_TRUE(m.edges.empty());
}

TEST(PathMatching, DynamicProgrammingExamples) {
  std::vector<Edge> single{{0, 1, 4.0}};
  EXPECT_EQ(max_weight_matching_path(single).edges.size(), 1u);

  std::vector<Edge> p{{0, 1, 3.0}, {1, 2, 1.0}, {2, 3, 2.0}};
  auto m = max_weight_matching_path(p);
  ASSERT_EQ(m.edges.size(), 2u);
  EXPECT_EQ(m.edges[0], p[0]);
  EXPECT_EQ(m.edges[1], p[2]);
  EXPECT_EQ(m.total_weight, 5.0);

  std::vector<Edge> q{{0, 1, 1.0}, {1, 2, 5.0}, {2, 3, 1.0}};
  auto mq = max_weight_matching_path(q);
  ASSERT_EQ(mq.edges.size(), 1u);
  EXPECT_EQ(mq.edges[0], q[1]);
  EXPECT_EQ(mq.total_weight, 5.0);
}

TEST(PathMatching, TiesPreferFewerEarlierEdges) {
  // [1, 2, 1]: {e1, e3} and {e2} both weigh 2; the tie keeps the earlier choice.
  std::vector<Edge> p{{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 1.0}};
  auto m = max_weight_matching_path(p);
  ASSERT_EQ(m.edges.size(), 1u);
  EXPECT_EQ(m.edges[0], p[1]);
}

TEST(PathMatching, RejectsNonPath) {
  std::vector<Edge> bad{{0, 1, 1.0}, {2, 3, 1.0}};
  EXPECT_THROW(max_weight_matching_path(bad), UsageError);
}

TEST(Coarsen, SingleEdge) {
  auto g = Graph::from_edges(2, {{0, 1, 1.0}});
  auto lvl = coarsen(g, path_grow_select(g));
  EXPECT_EQ(lvl.coarse.num_nodes(), 1u);
  EXPECT_EQ(lvl.coarse.num_edges(), 0u);
}

TEST(Coarsen, PathMergesIntoTwo) {
  auto g = weighted_path({1, 1, 1});
  Matching m{{{0, 1, 1.0}, {2, 3, 1.0}}, 2.0};
  auto lvl = coarsen(g, m);
  ASSERT_EQ(lvl.coarse.num_nodes(), 2u);
  EXPECT_EQ(lvl.coarse.weight(0, 1), 1.0);
  EXPECT_EQ(lvl.members, (std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}}));
}

TEST(Coarsen, SquareSumsParallelEdges) {
  auto g = cycle(4);
  Matching m{{{0, 1, 1.0}, {2, 3, 1.0}}, 2.0};
  auto lvl = coarsen(g, m);
  ASSERT_EQ(lvl.coarse.num_nodes(), 2u);
  EXPECT_EQ(lvl.coarse.weight(0, 1), 2.0);
}

TEST(Coarsen, SuperNodesOrderedByMinimumMember) {
  auto g = Graph::from_edges(4, {{0, 3, 1.0}, {1, 2, 1.0}, {0, 1, 0.5}});
  Matching m{{{1, 2, 1.0}, {0, 3, 1.0}}, 2.0};
  auto lvl = coarsen(g, m);
  EXPECT_EQ(lvl.members, (std::vector<std::vector<std::size_t>>{{0, 3}, {1, 2}}));
  EXPECT_EQ(lvl.assignment, (std::vector<std::size_t>{0, 1, 1, 0}));
}

TEST(Coarsen, RejectsInvalidMatching) {
  auto g = weighted_path({1, 1, 1});
  Matching shared{{{0, 1, 1.0}, {1, 2, 1.0}}, 2.0};
  EXPECT_THROW(coarsen(g, shared), PartitionError);
  Matching missing{{{0, 2, 1.0}}, 1.0};
  EXPECT_THROW(coarsen(g, missing), PartitionError);
}

TEST(Multilevel, SingleNodeIsIdentity) {
  auto pm = multilevel_partition(Graph(Eigen::MatrixXd::Zero(1, 1)), 1);
  EXPECT_EQ(pm.node_count(1), 1u);
  EXPECT_EQ(pm.composed(), (std::vector<std::size_t>{0}));
}

TEST(Multilevel, EightCycleTwoLevels) {
  auto pm = multilevel_partition(cycle(8), 2);
  EXPECT_EQ(pm.node_count(1), 4u);
  EXPECT_EQ(pm.node_count(2), 2u);
  EXPECT_EQ(pm.composed(1), (std::vector<std::size_t>{0, 0, 1, 1, 2, 2, 3, 3}));
  EXPECT_EQ(pm.composed(2), (std::vector<std::size_t>{0, 0, 0, 0, 1, 1, 1, 1}));
  EXPECT_EQ(pm.graph(2).weight(0, 1), 2.0);
}

TEST(Multilevel, FourPathOneLevel) {
  auto pm = multilevel_partition(weighted_path({3, 1, 2}), 1);
  EXPECT_EQ(pm.node_count(1), 2u);
}

TEST(Multilevel, RejectsLevelZero) {
  EXPECT_THROW(multilevel_partition(cycle(4), 0), UsageError);
}

TEST(Multilevel, DeterministicText) {
  auto g = random_graph(11, 0.4, 77);
  EXPECT_EQ(multilevel_partition(g, 3).to_text(), multilevel_partition(g, 3).to_text());
  auto text = multilevel_partition(weighted_path({3, 1, 2}), 1).to_text();
  EXPECT_EQ(text,
            "level 1: node 0 -> super 0\nlevel 1: node 1 -> super 0\n"
            "level 1: node 2 -> super 1\nlevel 1: node 3 -> super 1\n");
}

TEST(InvertMap, Examples) {
  auto ident = multilevel_partition(Graph(Eigen::MatrixXd::Zero(2, 2)), 1);
  EXPECT_EQ(invert_map(ident)[0], (std::vector<std::vector<std::size_t>>{{0}, {1}}));

  auto pm = multilevel_partition(weighted_path({3, 1, 2}), 1);
  EXPECT_EQ(invert_map(pm)[0], (std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}}));
}

TEST(InvertMap, CoversEveryNodeOnce) {
  auto g = random_graph(12, 0.35, 5);
  auto pm = multilevel_partition(g, 2);
  auto inv = invert_map(pm);
  for (std::size_t k = 1; k <= pm.num_levels(); ++k) {
    std::multiset<std::size_t> seen;
    const auto& lvl = pm.level(k);
    for (std::size_t s = 0; s < inv[k - 1].size(); ++s) {
      EXPECT_EQ(inv[k - 1][s], lvl.members[s]);
      EXPECT_LE(inv[k - 1][s].size(), 2u);
      for (auto i : inv[k - 1][s]) {
        EXPECT_EQ(lvl.assignment[i], s);
        seen.insert(i);
      }
    }
    EXPECT_EQ(seen.size(), lvl.assignment.size());
    EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), seen.size());
  }
}

TEST(BruteForce, RejectsOversizeGraphs) {
  EXPECT_THROW(brute_force_matching(Graph(Eigen::MatrixXd::Zero(13, 13))), UsageError);
}

// Randomized properties over 100 seeds (N ≤ 12).
TEST(PathGrowProperties, ValidMaximalHalfApproximate) {
  for (int seed = 0; seed < 100; ++seed) {
    const std::size_t n = 2 + seed % 11;
    auto g = random_graph(n, 0.2 + 0.05 * (seed % 10), 1000 + seed);
    auto m = path_grow_select(g);
    ASSERT_TRUE(is_valid_matching(g, m)) << "seed " << seed;
    ASSERT_TRUE(is_maximal_matching(g, m)) << "seed " << seed;
    EXPECT_GE(m.total_weight, 0.5 * brute_force_matching(g).total_weight) << "seed " << seed;

    auto lvl = coarsen(g, m);
    EXPECT_EQ(lvl.coarse.num_nodes(), n - m.edges.size());
    if (g.num_edges() > 0) EXPECT_LT(lvl.coarse.num_nodes(), n);
    // Weight conservation: only matched (intra-group) edges disappear.
    EXPECT_NEAR(lvl.coarse.total_weight(), g.total_weight() - m.total_weight, 1e-12);
  }
}
