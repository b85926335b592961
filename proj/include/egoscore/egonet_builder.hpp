#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "egoscore/bloom.hpp"
#include "egoscore/graph.hpp"

namespace egoscore {

struct BuilderConfig {
  /// Max nodes per ego-net, ego included.
  std::size_t cap = 300;
  double bloom_bits_per_edge = 10.0;
  int bloom_hashes = 7;
  std::uint64_t bloom_salt = 0x5eed;
  bool include_pendants = true;
  /// Unordered closing-edge keys. When false the closing edge must exist in
  /// the orientation ego -> v.
  bool undirected_closure = true;
  /// Local stand-in for the number of MapReduce workers.
  int partitions = 1;
};

void validate(const BuilderConfig& cfg);

/// Wedge (ego, v) closed through common neighbor u.
struct TriangleCandidate {
  NodeId ego = 0;
  NodeId v = 0;
  NodeId u = 0;

  friend auto operator<=>(const TriangleCandidate&, const TriangleCandidate&) = default;
};

/// Partition owning a node or an edge key.
std::size_t node_partition(NodeId id, std::size_t partitions);

/// Filter over all closing-edge keys of g, sized bloom_bits_per_edge bits per key.
BloomFilter build_bloom(const Graph& g, const BuilderConfig& cfg);

/// Map stage: every pair of neighbors {a, b} of every node u whose closing
/// edge passes the filter yields (a, b, u) and (b, a, u).
std::vector<TriangleCandidate> emit_wedges(const Graph& g, const BloomFilter& bloom, bool undirected_closure = true);
std::vector<TriangleCandidate> emit_wedges(const Graph& g, const BloomFilter& bloom, bool undirected_closure,
                                           std::size_t partition, std::size_t partitions);

/// Semi-join of candidates against the true edge set; drops filter false positives.
std::vector<TriangleCandidate> verify_join(std::vector<TriangleCandidate> candidates, const Graph& g,
                                           bool undirected_closure = true);

/// Sum over both directions and all types of the ego's edges with u, with
/// friendship age passed through transform_time.
double ego_activity(const Graph& g, NodeId ego, NodeId u);

/// Members kept for `ego` from `candidates`: the (cap - 1) highest-activity
/// nodes, ties by smaller id; returned in ascending id order.
std::vector<NodeId> select_members(const Graph& g, NodeId ego, std::vector<NodeId> candidates, std::size_t cap);

/// Reduce stage: one EgoNet per ego with at least one member, sorted by ego.
std::vector<EgoNet> group_by_ego(std::span<const TriangleCandidate> verified, const Graph& g, const BuilderConfig& cfg);

/// Full pipeline over cfg.partitions local partitions; sorted by ego id.
std::vector<EgoNet> build_egonets(const Graph& g, const BuilderConfig& cfg);

/// build_egonets written to `sink` in the ego-net text format. Returns the count.
std::size_t build_all_egonets(const Graph& g, const BuilderConfig& cfg, std::ostream& sink);

}  // namespace egoscore
