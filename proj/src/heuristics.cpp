#include "egoscore/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace egoscore {

namespace {

RelevanceMatrix constant_off_ego(const EgoNet& e, double value) {
  const std::size_t n = e.size();
  RelevanceMatrix m(n);
  for (std::size_t u = 1; u < n; ++u) {
    for (std::size_t v = 1; v < n; ++v) {
      if (u != v) m(u, v) = value;
    }
  }
  return m;
}

const double kLn3 = std::log(3.0);

/// Undirected neighbor lists of the non-ego members.
std::vector<std::vector<LocalId>> local_neighbors(const EgoNet& e) {
  std::vector<std::vector<LocalId>> nb(e.size());
  for (const auto& edge : e.edges) {
    nb[edge.src].push_back(static_cast<LocalId>(edge.dst));
    nb[edge.dst].push_back(static_cast<LocalId>(edge.src));
  }
  for (auto& list : nb) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nb;
}

}  // namespace

RelevanceMatrix adamic_adar_local(const EgoNet& e, AdamicAdarSize size) {
  const double count = size == AdamicAdarSize::neighbor_count ? static_cast<double>(e.size()) - 1.0
                                                              : static_cast<double>(e.size());
  const double denom = count >= 3.0 ? std::log(count) : kLn3;
  return constant_off_ego(e, 1.0 / denom);
}

RelevanceMatrix common_neighbors_local(const EgoNet& e) { return constant_off_ego(e, 1.0); }

double activity_weight(std::span<const double> ego_edge_features) {
  return std::accumulate(ego_edge_features.begin(), ego_edge_features.end(), 0.0);
}

RelevanceMatrix weighted_adamic_adar_local(const EgoNet& e, const WeightFn& weight_fn) {
  const std::size_t n = e.size();
  std::vector<double> w(n, 0.0);
  double total = 0.0;
  for (std::size_t u = 1; u < n; ++u) {
    w[u] = weight_fn(e.node_features.row(u));
    if (!(w[u] >= 0.0)) throw std::invalid_argument("weight_fn returned a negative weight");
    total += w[u];
  }
  const double denom = 2.0 * std::max(std::log1p(total), kLn3);
  RelevanceMatrix m(n);
  for (std::size_t u = 1; u < n; ++u) {
    for (std::size_t v = 1; v < n; ++v) {
      if (u != v) m(u, v) = (w[u] + w[v]) / denom;
    }
  }
  return m;
}

ClusterAssignment label_propagation_clusters(const EgoNet& e, int max_iters, std::uint64_t seed) {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  const std::size_t n = e.size();
  const auto nb = local_neighbors(e);

  std::vector<int> labels(n);
  std::iota(labels.begin(), labels.end(), 0);
  if (seed != 0 && n > 2) {
    std::mt19937_64 rng(seed);
    std::shuffle(labels.begin() + 1, labels.end(), rng);
  }
  labels[0] = -1;

  std::vector<int> next(labels);
  std::vector<int> counts(n, 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t u = 1; u < n; ++u) {
      ++counts[static_cast<std::size_t>(labels[u])];
      for (LocalId v : nb[u]) ++counts[static_cast<std::size_t>(labels[v])];
      int best = labels[u];
      auto consider = [&](int label) {
        const int c = counts[static_cast<std::size_t>(label)], cb = counts[static_cast<std::size_t>(best)];
        if (c > cb || (c == cb && label < best)) best = label;
      };
      consider(labels[u]);
      for (LocalId v : nb[u]) consider(labels[v]);
      counts[static_cast<std::size_t>(labels[u])] = 0;
      for (LocalId v : nb[u]) counts[static_cast<std::size_t>(labels[v])] = 0;
      next[u] = best;
      changed |= best != labels[u];
    }
    labels.swap(next);
    if (!changed) break;
  }
  return {std::move(labels)};
}

ClusterAssignment connected_component_clusters(const EgoNet& e) {
  const std::size_t n = e.size();
  const auto nb = local_neighbors(e);
  std::vector<int> labels(n, -1);
  for (std::size_t s = 1; s < n; ++s) {
    if (labels[s] != -1) continue;
    std::vector<std::size_t> stack{s};
    labels[s] = static_cast<int>(s);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (LocalId v : nb[u]) {
        if (labels[v] == -1) {
          labels[v] = static_cast<int>(s);
          stack.push_back(v);
        }
      }
    }
  }
  return {std::move(labels)};
}

RelevanceMatrix cluster_friendship_score(const EgoNet& e, const ClusterFn& cluster_fn) {
  const std::size_t n = e.size();
  const auto clusters = cluster_fn(e);
  if (clusters.labels.size() != n) throw std::invalid_argument("cluster_fn must label every node");
  RelevanceMatrix m(n);
  for (std::size_t u = 1; u < n; ++u) {
    for (std::size_t v = 1; v < n; ++v) {
      if (u != v && clusters.labels[u] == clusters.labels[v]) m(u, v) = 1.0;
    }
  }
  return m;
}

FriendshipScoreModel::FriendshipScoreModel()
    : fn_([](const EgoNet& e) { return label_propagation_clusters(e, 20, 0); }) {}

}  // namespace egoscore
