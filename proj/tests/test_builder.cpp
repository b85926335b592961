#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "egoscore/bloom.hpp"
#include "egoscore/egonet_builder.hpp"
#include "egoscore/egonet_io.hpp"
#include "test_support.hpp"

namespace egoscore {
namespace {

using testing::undirected_graph;

std::set<std::tuple<NodeId, NodeId, NodeId>> built_triangle_edges(const std::vector<EgoNet>& egonets) {
  std::set<std::tuple<NodeId, NodeId, NodeId>> out;
  for (const auto& e : egonets) {
    for (const auto& edge : e.edges) {
      NodeId a = e.local_to_global[edge.src], b = e.local_to_global[edge.dst];
      if (a > b) std::swap(a, b);
      out.emplace(e.ego, a, b);
    }
  }
  return out;
}

TEST(Bloom, NoFalseNegatives) {
  BloomFilter bloom(2000, 7, 42);
  for (std::uint64_t i = 0; i < 200; ++i) bloom.insert(i, i * 31 + 7);
  for (std::uint64_t i = 0; i < 200; ++i) EXPECT_TRUE(bloom.contains(i, i * 31 + 7));
}

TEST(Bloom, EmptyFilterContainsNothing) {
  const auto g = build_adjacency(Graph(std::vector<TypedEdge>{}));
  const auto bloom = build_bloom(g, BuilderConfig{});
  EXPECT_FALSE(bloom.contains(1, 2));
  EXPECT_FALSE(BloomFilter().contains(0, 0));
}

TEST(Bloom, FalsePositiveRateNearAnalytic) {
  const std::size_t n = 1000;
  BloomFilter bloom(10 * n, 7, 9);
  for (std::uint64_t i = 0; i < n; ++i) bloom.insert(i, i + 1);
  std::size_t hits = 0;
  const std::size_t probes = 10000;
  for (std::uint64_t i = 0; i < probes; ++i) hits += bloom.contains(1'000'000 + i, 5);
  const double observed = static_cast<double>(hits) / probes;
  const double analytic = std::pow(1.0 - std::exp(-7.0 * n / (10.0 * n)), 7.0);
  EXPECT_DOUBLE_EQ(bloom.expected_false_positive_rate(n), analytic);
  EXPECT_LE(observed, 3.0 * analytic);
  EXPECT_GE(observed, analytic / 3.0);
}

TEST(Builder, BloomHoldsEveryEdgeKey) {
  const auto g = undirected_graph({{1, 2}, {2, 3}, {5, 9}});
  const auto bloom = build_bloom(g, BuilderConfig{});
  EXPECT_TRUE(bloom.contains(1, 2));
  EXPECT_TRUE(bloom.contains(2, 3));
  EXPECT_TRUE(bloom.contains(5, 9));
  EXPECT_EQ(bloom.bits(), 30u);
}

TEST(Builder, TriangleWedgeEmitted) {
  const auto g = undirected_graph({{1, 2}, {2, 3}, {1, 3}});
  const auto wedges = emit_wedges(g, build_bloom(g, BuilderConfig{}));
  EXPECT_NE(std::find(wedges.begin(), wedges.end(), TriangleCandidate{1, 3, 2}), wedges.end());
  EXPECT_NE(std::find(wedges.begin(), wedges.end(), TriangleCandidate{3, 1, 2}), wedges.end());
}

TEST(Builder, SaturatedBloomPassesPathWedgeButJoinDropsIt) {
  const auto g = undirected_graph({{1, 2}, {2, 3}});
  BloomFilter all_ones(1, 1, 0);
  all_ones.insert(0, 0);
  const auto wedges = emit_wedges(g, all_ones);
  EXPECT_NE(std::find(wedges.begin(), wedges.end(), TriangleCandidate{1, 3, 2}), wedges.end());
  EXPECT_TRUE(verify_join(wedges, g).empty());
}

TEST(Builder, JoinKeepsMemberEdges) {
  const auto g = undirected_graph({{1, 2}, {2, 3}, {1, 3}});
  const auto kept = verify_join({{1, 3, 2}}, g);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0], (TriangleCandidate{1, 3, 2}));
}

TEST(Builder, StarHasNoTriangles) {
  const auto g = undirected_graph({{2, 1}, {2, 3}, {2, 4}});
  BloomFilter all_ones(1, 1, 0);
  all_ones.insert(0, 0);
  EXPECT_TRUE(verify_join(emit_wedges(g, all_ones), g).empty());
}

TEST(Builder, VerifiedWedgesMatchBruteForce) {
  const auto g = testing::random_graph(50, 0.1, 17);
  BuilderConfig cfg;
  cfg.bloom_bits_per_edge = 0.5;
  const auto verified = verify_join(emit_wedges(g, build_bloom(g, cfg)), g);
  std::set<std::tuple<NodeId, NodeId, NodeId>> got;
  for (const auto& c : verified) got.emplace(c.ego, std::min(c.v, c.u), std::max(c.v, c.u));
  EXPECT_EQ(got, testing::naive_triangle_edges(g));
}

TEST(Builder, TriangleEgoNet) {
  const auto g = undirected_graph({{1, 2}, {2, 3}, {1, 3}});
  const auto egonets = build_egonets(g, BuilderConfig{});
  ASSERT_EQ(egonets.size(), 3u);
  const auto& e = egonets[0];
  EXPECT_EQ(e.ego, 1u);
  EXPECT_EQ(e.local_to_global, (std::vector<NodeId>{1, 2, 3}));
  ASSERT_EQ(e.edges.size(), 2u);
  EXPECT_EQ(e.edges[0].src, 1u);
  EXPECT_EQ(e.edges[0].dst, 2u);
  EXPECT_EQ(e.edges[1].src, 2u);
  EXPECT_EQ(e.edges[1].dst, 1u);
}

TEST(Builder, StarWithPendants) {
  const auto g = undirected_graph({{1, 2}, {1, 3}, {1, 4}});
  const auto egonets = build_egonets(g, BuilderConfig{});
  ASSERT_FALSE(egonets.empty());
  EXPECT_EQ(egonets[0].ego, 1u);
  EXPECT_EQ(egonets[0].size(), 4u);
  EXPECT_TRUE(egonets[0].edges.empty());

  BuilderConfig no_pendants;
  no_pendants.include_pendants = false;
  EXPECT_TRUE(build_egonets(g, no_pendants).empty());
}

TEST(Builder, CapKeepsMostActive) {
  // activity with ego 0: node 1 -> 5, node 2 -> 3, node 3 -> 1
  auto g = build_adjacency(Graph({{0, 1, 1, 5.0}, {0, 2, 1, 3.0}, {0, 3, 1, 1.0}, {1, 2, 0, 1.0}, {2, 3, 0, 1.0}}));
  EXPECT_DOUBLE_EQ(ego_activity(g, 0, 1), 5.0);
  const auto kept = select_members(g, 0, {1, 2, 3}, 3);
  EXPECT_EQ(kept, (std::vector<NodeId>{1, 2}));

  BuilderConfig cfg;
  cfg.cap = 3;
  const auto egonets = build_egonets(g, cfg);
  ASSERT_FALSE(egonets.empty());
  EXPECT_EQ(egonets[0].local_to_global, (std::vector<NodeId>{0, 1, 2}));
  for (const auto& e : egonets) EXPECT_LE(e.size(), cfg.cap);
}

TEST(Builder, CapTieBreaksBySmallerId) {
  auto g = build_adjacency(Graph({{0, 4, 1, 2.0}, {0, 2, 1, 2.0}, {0, 3, 1, 2.0}}));
  EXPECT_EQ(select_members(g, 0, {2, 3, 4}, 3), (std::vector<NodeId>{2, 3}));
}

TEST(Builder, CapMonotone) {
  const auto g = testing::random_graph(60, 0.3, 5);
  for (NodeId ego = 0; ego < 10; ++ego) {
    auto nb = g.neighbors(ego);
    std::vector<NodeId> cands(nb.begin(), nb.end());
    for (std::size_t cap = 2; cap < 12; ++cap) {
      auto small = select_members(g, ego, cands, cap);
      auto large = select_members(g, ego, cands, cap + 1);
      EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
    }
  }
}

TEST(Builder, CompleteGraphK4) {
  const auto g = undirected_graph({{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  const auto egonets = build_egonets(g, BuilderConfig{});
  ASSERT_EQ(egonets.size(), 4u);
  for (const auto& e : egonets) {
    EXPECT_EQ(e.size(), 4u);
    EXPECT_EQ(e.edges.size(), 6u);  // 3 undirected edges, both directions
  }
}

TEST(Builder, EdgelessAndIsolated) {
  std::ostringstream out;
  EXPECT_EQ(build_all_egonets(build_adjacency(Graph(std::vector<TypedEdge>{})), BuilderConfig{}, out), 0u);
  const auto g = undirected_graph({{1, 2}, {2, 3}, {1, 3}, {4, 5}});
  BuilderConfig cfg;
  cfg.include_pendants = false;
  EXPECT_EQ(build_egonets(g, cfg).size(), 3u);
  // node 0 and 6 never appear; with pendants 4 and 5 get ego-nets too
  EXPECT_EQ(build_egonets(g, BuilderConfig{}).size(), 5u);
}

TEST(Builder, OracleEquivalenceAcrossBloomConfigs) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto g = testing::random_graph(40 + seed * 5, seed % 2 ? 0.1 : 0.25, seed);
    const auto expected = testing::naive_triangle_edges(g);
    for (double bpe : {10.0, 2.0, 0.05}) {
      BuilderConfig cfg;
      cfg.include_pendants = false;
      cfg.bloom_bits_per_edge = bpe;
      cfg.partitions = static_cast<int>(1 + seed % 4);
      EXPECT_EQ(built_triangle_edges(build_egonets(g, cfg)), expected) << "seed " << seed << " bpe " << bpe;
    }
  }
}

TEST(Builder, IntraEdgesKeepTypesAndDirections) {
  const auto g = testing::random_graph(30, 0.3, 8);
  for (const auto& e : build_egonets(g, BuilderConfig{})) {
    for (const auto& edge : e.edges) {
      const NodeId a = e.local_to_global[edge.src], b = e.local_to_global[edge.dst];
      bool found = false;
      for (const auto& adj : g.out_edges(a)) found |= adj.nbr == b && adj.etype == edge.etype;
      EXPECT_TRUE(found);
    }
    validate(e);
  }
}

TEST(Builder, OutputIndependentOfPartitions) {
  const auto g = testing::random_graph(80, 0.1, 21);
  std::string reference;
  for (int parts : {1, 2, 3, 8}) {
    BuilderConfig cfg;
    cfg.partitions = parts;
    std::ostringstream out;
    build_all_egonets(g, cfg, out);
    if (reference.empty()) reference = out.str();
    EXPECT_EQ(out.str(), reference) << parts << " partitions";
  }
}

TEST(Builder, DirectedClosureNeedsEgoToV) {
  // triangle where the 1-3 edge only goes 3 -> 1
  auto g = build_adjacency(Graph({{1, 2, 0, 1.0}, {2, 3, 0, 1.0}, {3, 1, 0, 1.0}}));
  BuilderConfig cfg;
  cfg.include_pendants = false;
  cfg.undirected_closure = false;
  const auto verified = verify_join(emit_wedges(g, build_bloom(g, cfg), false), g, false);
  EXPECT_NE(std::find(verified.begin(), verified.end(), TriangleCandidate{3, 1, 2}), verified.end());
  EXPECT_EQ(std::find(verified.begin(), verified.end(), TriangleCandidate{1, 3, 2}), verified.end());
}

TEST(Builder, InvalidConfig) {
  BuilderConfig cfg;
  cfg.cap = 1;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.bloom_hashes = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}

}  // namespace
}  // namespace egoscore
