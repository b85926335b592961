#include "egoscore/egonet_builder.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "egoscore/egonet_io.hpp"

namespace egoscore {

namespace {

using EdgeKey = std::pair<NodeId, NodeId>;

EdgeKey closing_key(const TriangleCandidate& c, bool undirected) {
  if (undirected) return {std::min(c.ego, c.v), std::max(c.ego, c.v)};
  return {c.ego, c.v};
}

std::size_t key_partition(const EdgeKey& k, std::size_t partitions) {
  return partitions <= 1 ? 0 : hash_pair(k.first, k.second, 0x51) % partitions;
}

/// Every key the closing-edge test can ask about, sorted and unique.
std::vector<EdgeKey> edge_keys(const Graph& g, bool undirected) {
  std::vector<EdgeKey> keys;
  if (undirected) {
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
      for (NodeId v : g.neighbors(u)) {
        if (u < v) keys.emplace_back(u, v);
      }
    }
  } else {
    keys.reserve(g.edges().size());
    for (const auto& e : g.edges()) keys.emplace_back(e.src, e.dst);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  }
  return keys;
}

/// Keeps candidates whose closing key appears in `sorted_keys`. Sorts `candidates` by key.
std::vector<TriangleCandidate> semi_join(std::vector<TriangleCandidate> candidates,
                                         std::span<const EdgeKey> sorted_keys, bool undirected) {
  std::sort(candidates.begin(), candidates.end(), [&](const auto& a, const auto& b) {
    auto ka = closing_key(a, undirected), kb = closing_key(b, undirected);
    return ka != kb ? ka < kb : a < b;
  });
  std::vector<TriangleCandidate> kept;
  std::size_t j = 0;
  for (const auto& c : candidates) {
    const auto key = closing_key(c, undirected);
    while (j < sorted_keys.size() && sorted_keys[j] < key) ++j;
    if (j < sorted_keys.size() && sorted_keys[j] == key) kept.push_back(c);
  }
  return kept;
}

void append_edges_between(const Graph& g, NodeId a, NodeId b, LocalId la, LocalId lb, std::vector<TypedEdge>& out) {
  auto out_a = g.out_edges(a);
  auto it = std::lower_bound(out_a.begin(), out_a.end(), b, [](const AdjEntry& x, NodeId v) { return x.nbr < v; });
  for (; it != out_a.end() && it->nbr == b; ++it) {
    out.push_back({la, lb, it->etype, g.edges()[it->edge].attr});
  }
}

/// Builds the ego-net of `ego` from its verified wedges (all with c.ego == ego).
std::optional<EgoNet> assemble(const Graph& g, const BuilderConfig& cfg, NodeId ego,
                               std::span<const TriangleCandidate> wedges) {
  std::vector<NodeId> candidates;
  if (cfg.include_pendants) {
    auto nb = g.neighbors(ego);
    candidates.assign(nb.begin(), nb.end());
  } else {
    for (const auto& w : wedges) {
      candidates.push_back(w.v);
      candidates.push_back(w.u);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  }
  if (candidates.empty()) return std::nullopt;

  auto members = select_members(g, ego, std::move(candidates), cfg.cap);

  EgoNet e;
  e.ego = ego;
  e.num_types = g.num_types();
  e.local_to_global.reserve(members.size() + 1);
  e.local_to_global.push_back(ego);
  e.local_to_global.insert(e.local_to_global.end(), members.begin(), members.end());
  auto local_of = [&](NodeId global) -> std::optional<LocalId> {
    auto it = std::lower_bound(members.begin(), members.end(), global);
    if (it == members.end() || *it != global) return std::nullopt;
    return static_cast<LocalId>(it - members.begin() + 1);
  };

  std::vector<EdgeKey> pairs;
  pairs.reserve(wedges.size());
  for (const auto& w : wedges) pairs.emplace_back(std::min(w.v, w.u), std::max(w.v, w.u));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (const auto& [a, b] : pairs) {
    auto la = local_of(a), lb = local_of(b);
    if (!la || !lb) continue;
    append_edges_between(g, a, b, *la, *lb, e.edges);
    append_edges_between(g, b, a, *lb, *la, e.edges);
  }
  std::sort(e.edges.begin(), e.edges.end(), edge_less);

  std::vector<TypedEdge> ego_edges;
  for (const auto& adj : g.out_edges(ego)) {
    if (auto l = local_of(adj.nbr)) ego_edges.push_back({0, *l, adj.etype, g.edges()[adj.edge].attr});
  }
  for (const auto& adj : g.in_edges(ego)) {
    if (auto l = local_of(adj.nbr)) ego_edges.push_back({*l, 0, adj.etype, g.edges()[adj.edge].attr});
  }
  derive_node_features(e, ego_edges);
  return e;
}

/// Reduce over egos owned by `partition`; `wedges` sorted by (ego, v, u).
std::vector<EgoNet> reduce_partition(const Graph& g, const BuilderConfig& cfg, std::span<const TriangleCandidate> wedges,
                                     std::size_t partition, std::size_t partitions) {
  std::vector<EgoNet> out;
  std::size_t i = 0;
  for (NodeId ego = 0; ego < g.num_nodes(); ++ego) {
    if (node_partition(ego, partitions) != partition) continue;
    while (i < wedges.size() && wedges[i].ego < ego) ++i;
    std::size_t j = i;
    while (j < wedges.size() && wedges[j].ego == ego) ++j;
    if (g.degree(ego) > 0) {
      if (auto e = assemble(g, cfg, ego, wedges.subspan(i, j - i))) out.push_back(std::move(*e));
    }
    i = j;
  }
  return out;
}

}  // namespace

void validate(const BuilderConfig& cfg) {
  if (cfg.cap < 2) throw std::invalid_argument("cap must be >= 2");
  if (cfg.bloom_hashes < 1) throw std::invalid_argument("bloom_hashes must be >= 1");
  if (!(cfg.bloom_bits_per_edge > 0.0)) throw std::invalid_argument("bloom_bits_per_edge must be > 0");
  if (cfg.partitions < 1) throw std::invalid_argument("partitions must be >= 1");
}

std::size_t node_partition(NodeId id, std::size_t partitions) {
  return partitions <= 1 ? 0 : mix64(id) % partitions;
}

BloomFilter build_bloom(const Graph& g, const BuilderConfig& cfg) {
  const auto keys = edge_keys(g, cfg.undirected_closure);
  if (keys.empty()) return BloomFilter(0, cfg.bloom_hashes, cfg.bloom_salt);
  const auto bits = static_cast<std::size_t>(std::ceil(cfg.bloom_bits_per_edge * static_cast<double>(keys.size())));
  BloomFilter bloom(std::max<std::size_t>(bits, 1), cfg.bloom_hashes, cfg.bloom_salt);
  for (const auto& [a, b] : keys) bloom.insert(a, b);
  return bloom;
}

std::vector<TriangleCandidate> emit_wedges(const Graph& g, const BloomFilter& bloom, bool undirected_closure,
                                           std::size_t partition, std::size_t partitions) {
  std::vector<TriangleCandidate> out;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (node_partition(u, partitions) != partition) continue;
    auto nb = g.neighbors(u);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        const NodeId a = nb[i], b = nb[j];
        if (undirected_closure) {
          if (bloom.contains(a, b)) {
            out.push_back({a, b, u});
            out.push_back({b, a, u});
          }
        } else {
          if (bloom.contains(a, b)) out.push_back({a, b, u});
          if (bloom.contains(b, a)) out.push_back({b, a, u});
        }
      }
    }
  }
  return out;
}

std::vector<TriangleCandidate> emit_wedges(const Graph& g, const BloomFilter& bloom, bool undirected_closure) {
  return emit_wedges(g, bloom, undirected_closure, 0, 1);
}

std::vector<TriangleCandidate> verify_join(std::vector<TriangleCandidate> candidates, const Graph& g,
                                           bool undirected_closure) {
  const auto keys = edge_keys(g, undirected_closure);
  return semi_join(std::move(candidates), keys, undirected_closure);
}

double ego_activity(const Graph& g, NodeId ego, NodeId u) {
  double total = 0.0;
  auto sum_range = [&](std::span<const AdjEntry> adj) {
    auto it = std::lower_bound(adj.begin(), adj.end(), u, [](const AdjEntry& x, NodeId v) { return x.nbr < v; });
    for (; it != adj.end() && it->nbr == u; ++it) total += transformed_attr(it->etype, g.edges()[it->edge].attr);
  };
  sum_range(g.out_edges(ego));
  sum_range(g.in_edges(ego));
  return total;
}

std::vector<NodeId> select_members(const Graph& g, NodeId ego, std::vector<NodeId> candidates, std::size_t cap) {
  const std::size_t keep = cap - 1;
  if (candidates.size() > keep) {
    std::vector<std::pair<double, NodeId>> ranked;
    ranked.reserve(candidates.size());
    for (NodeId u : candidates) ranked.emplace_back(ego_activity(g, ego, u), u);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    candidates.clear();
    for (std::size_t i = 0; i < keep; ++i) candidates.push_back(ranked[i].second);
  }
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

std::vector<EgoNet> group_by_ego(std::span<const TriangleCandidate> verified, const Graph& g,
                                 const BuilderConfig& cfg) {
  std::vector<TriangleCandidate> sorted(verified.begin(), verified.end());
  std::sort(sorted.begin(), sorted.end());
  return reduce_partition(g, cfg, sorted, 0, 1);
}

std::vector<EgoNet> build_egonets(const Graph& g, const BuilderConfig& cfg) {
  validate(cfg);
  if (!g.has_adjacency()) throw std::logic_error("build_egonets needs a graph with adjacency");
  const auto parts = static_cast<std::size_t>(cfg.partitions);
  const bool undirected = cfg.undirected_closure;
  const BloomFilter bloom = build_bloom(g, cfg);

  // map: wedges routed by the partition of the edge that closes them
  std::vector<std::vector<std::vector<TriangleCandidate>>> routed(parts, std::vector<std::vector<TriangleCandidate>>(parts));
#pragma omp parallel for schedule(dynamic)
  for (std::size_t p = 0; p < parts; ++p) {
    for (const auto& c : emit_wedges(g, bloom, undirected, p, parts)) {
      routed[p][key_partition(closing_key(c, undirected), parts)].push_back(c);
    }
  }

  std::vector<std::vector<EdgeKey>> keys_by_part(parts);
  for (const auto& k : edge_keys(g, undirected)) keys_by_part[key_partition(k, parts)].push_back(k);

  // join: semi-join each key partition, route survivors by ego
  std::vector<std::vector<std::vector<TriangleCandidate>>> by_ego(parts, std::vector<std::vector<TriangleCandidate>>(parts));
#pragma omp parallel for schedule(dynamic)
  for (std::size_t q = 0; q < parts; ++q) {
    std::vector<TriangleCandidate> incoming;
    for (std::size_t p = 0; p < parts; ++p) {
      incoming.insert(incoming.end(), routed[p][q].begin(), routed[p][q].end());
      std::vector<TriangleCandidate>().swap(routed[p][q]);
    }
    for (const auto& c : semi_join(std::move(incoming), keys_by_part[q], undirected)) {
      by_ego[q][node_partition(c.ego, parts)].push_back(c);
    }
  }

  // reduce: group by ego
  std::vector<std::vector<EgoNet>> reduced(parts);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t r = 0; r < parts; ++r) {
    std::vector<TriangleCandidate> wedges;
    for (std::size_t q = 0; q < parts; ++q) wedges.insert(wedges.end(), by_ego[q][r].begin(), by_ego[q][r].end());
    std::sort(wedges.begin(), wedges.end());
    reduced[r] = reduce_partition(g, cfg, wedges, r, parts);
  }

  std::vector<EgoNet> out;
  for (auto& part : reduced) {
    for (auto& e : part) out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const EgoNet& a, const EgoNet& b) { return a.ego < b.ego; });
  return out;
}

std::size_t build_all_egonets(const Graph& g, const BuilderConfig& cfg, std::ostream& sink) {
  const auto egonets = build_egonets(g, cfg);
  for (const auto& e : egonets) write_egonet(sink, e);
  if (!sink) throw std::runtime_error("failed writing ego-nets");
  return egonets.size();
}

}  // namespace egoscore
