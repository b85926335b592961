#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "egoscore/graph.hpp"

namespace egoscore {

/// Scores every node pair of one ego-net. Implementations must not carry
/// state between ego-nets.
class InEgoModel {
 public:
  virtual ~InEgoModel() = default;
  virtual std::string name() const = 0;
  virtual RelevanceMatrix score(const EgoNet& e) const = 0;
};

/// Which count stands in for the ego's degree in the local Adamic-Adar term.
enum class AdamicAdarSize {
  neighbor_count,  // n - 1, the classical common-neighbor degree
  egonet_size,     // n, the literal ego-net size
};

/// 1 / ln(max(size, 3)) on every pair of non-ego nodes; 0 elsewhere.
RelevanceMatrix adamic_adar_local(const EgoNet& e, AdamicAdarSize size = AdamicAdarSize::neighbor_count);

/// 1 on every pair of non-ego nodes; summed across ego-nets it counts common neighbors.
RelevanceMatrix common_neighbors_local(const EgoNet& e);

/// Maps the ego-edge feature row of a member to a non-negative weight.
using WeightFn = std::function<double(std::span<const double> ego_edge_features)>;

/// Sum of the member's (transformed) ego-edge attributes.
double activity_weight(std::span<const double> ego_edge_features);

/// (w(u) + w(v)) / (2 max(ln(1 + S), ln 3)) with S the ego's total weight.
/// Throws std::invalid_argument on a negative weight.
RelevanceMatrix weighted_adamic_adar_local(const EgoNet& e, const WeightFn& weight_fn = activity_weight);

struct ClusterAssignment {
  std::vector<int> labels;  // per local node; labels[0] (ego) is -1
};

using ClusterFn = std::function<ClusterAssignment(const EgoNet&)>;

/// Synchronous label propagation on the undirected intra ego-net topology.
/// Each node takes the most frequent label among itself and its neighbors,
/// ties to the smallest label. Seed 0 starts from label = local id; other
/// seeds start from a seeded permutation.
ClusterAssignment label_propagation_clusters(const EgoNet& e, int max_iters = 20, std::uint64_t seed = 0);

/// Connected components of the intra ego-net topology, labelled by smallest member id.
ClusterAssignment connected_component_clusters(const EgoNet& e);

/// 1 when both non-ego nodes share a cluster label, else 0.
RelevanceMatrix cluster_friendship_score(const EgoNet& e, const ClusterFn& cluster_fn);

class AdamicAdarModel final : public InEgoModel {
 public:
  explicit AdamicAdarModel(AdamicAdarSize size = AdamicAdarSize::neighbor_count) : size_(size) {}
  std::string name() const override { return "aa"; }
  RelevanceMatrix score(const EgoNet& e) const override { return adamic_adar_local(e, size_); }

 private:
  AdamicAdarSize size_;
};

class CommonNeighborsModel final : public InEgoModel {
 public:
  std::string name() const override { return "cn"; }
  RelevanceMatrix score(const EgoNet& e) const override { return common_neighbors_local(e); }
};

class WeightedAdamicAdarModel final : public InEgoModel {
 public:
  explicit WeightedAdamicAdarModel(WeightFn fn = activity_weight) : fn_(std::move(fn)) {}
  std::string name() const override { return "waa"; }
  RelevanceMatrix score(const EgoNet& e) const override { return weighted_adamic_adar_local(e, fn_); }

 private:
  WeightFn fn_;
};

class FriendshipScoreModel final : public InEgoModel {
 public:
  FriendshipScoreModel();
  explicit FriendshipScoreModel(ClusterFn fn) : fn_(std::move(fn)) {}
  std::string name() const override { return "fs"; }
  RelevanceMatrix score(const EgoNet& e) const override { return cluster_friendship_score(e, fn_); }

 private:
  ClusterFn fn_;
};

}  // namespace egoscore
