#include "egoscore/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "egoscore/walkgnn.hpp"

namespace egoscore {

void validate(const SyntheticConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("synthetic config: ") + what);
  };
  require(cfg.min_nodes >= 4, "min_nodes must be >= 4");
  require(cfg.max_nodes >= cfg.min_nodes, "max_nodes must be >= min_nodes");
  require(cfg.num_types >= 2, "num_types must be >= 2");
  require(cfg.min_blocks >= 1 && cfg.max_blocks >= cfg.min_blocks, "block range is invalid");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  require(prob(cfg.p_friend_in) && prob(cfg.p_friend_out) && prob(cfg.p_interaction) &&
              prob(cfg.p_stray_interaction) && prob(cfg.hot_fraction),
          "probabilities must lie in [0, 1]");
  require(cfg.hot_low <= cfg.hot_high && cfg.cold_low <= cfg.cold_high, "activity ranges are invalid");
  require(cfg.max_age_days >= 0.0, "max_age_days must be >= 0");
  require(cfg.min_gt >= 1 && cfg.max_gt >= cfg.min_gt, "ground-truth range is invalid");
  require(cfg.max_retries >= 0, "max_retries must be >= 0");
}

SyntheticConfig parse_synthetic_config(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("synthetic config must be a JSON object");
  SyntheticConfig cfg;
  std::set<std::string> known;
  auto get = [&](const char* key, auto& field) {
    known.insert(key);
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("n_egonets", cfg.n_egonets);
  get("min_nodes", cfg.min_nodes);
  get("max_nodes", cfg.max_nodes);
  get("num_types", cfg.num_types);
  get("min_blocks", cfg.min_blocks);
  get("max_blocks", cfg.max_blocks);
  get("p_friend_in", cfg.p_friend_in);
  get("p_friend_out", cfg.p_friend_out);
  get("p_interaction", cfg.p_interaction);
  get("p_stray_interaction", cfg.p_stray_interaction);
  get("hot_fraction", cfg.hot_fraction);
  get("hot_low", cfg.hot_low);
  get("hot_high", cfg.hot_high);
  get("cold_low", cfg.cold_low);
  get("cold_high", cfg.cold_high);
  get("max_age_days", cfg.max_age_days);
  get("path_weight", cfg.path_weight);
  get("block_weight", cfg.block_weight);
  get("min_gt", cfg.min_gt);
  get("max_gt", cfg.max_gt);
  get("seed", cfg.seed);
  get("max_retries", cfg.max_retries);
  get("id_offset", cfg.id_offset);
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw std::invalid_argument("synthetic config: unknown key '" + item.key() + "'");
  }
  validate(cfg);
  return cfg;
}

SyntheticConfig load_synthetic_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open synthetic config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_synthetic_config(text.str());
}

namespace {

// Portable draws on top of the raw engine output, so datasets match across standard libraries.
struct Draw {
  std::mt19937_64 rng;
  double uniform() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  bool bernoulli(double p) { return uniform() < p; }
};

struct Attempt {
  EgoNet egonet;
  RelevanceMatrix planted;
  bool ok = false;
};

Attempt generate_one(const SyntheticConfig& cfg, std::size_t index, int attempt) {
  std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(attempt)};
  Draw draw{std::mt19937_64(seq)};
  const int types = cfg.num_types;

  const std::size_t n = cfg.min_nodes + draw.below(cfg.max_nodes - cfg.min_nodes + 1);
  const int blocks = cfg.min_blocks + static_cast<int>(draw.below(static_cast<std::size_t>(cfg.max_blocks - cfg.min_blocks + 1)));
  std::vector<int> block(n, -1);
  for (std::size_t u = 1; u < n; ++u) block[u] = static_cast<int>(draw.below(static_cast<std::size_t>(blocks)));

  Attempt out;
  EgoNet& e = out.egonet;
  e.num_types = types;
  const NodeId base = cfg.id_offset + static_cast<NodeId>(index) * static_cast<NodeId>(cfg.max_nodes);
  e.ego = base;
  for (std::size_t u = 0; u < n; ++u) e.local_to_global.push_back(base + u);

  auto age = [&] { return std::floor(draw.uniform(0.0, cfg.max_age_days)); };
  auto activity = [&](bool hot) { return hot ? draw.uniform(cfg.hot_low, cfg.hot_high) : draw.uniform(cfg.cold_low, cfg.cold_high); };

  // ego edges carry no information about the rule
  std::vector<TypedEdge> ego_edges;
  for (LocalId u = 1; u < n; ++u) {
    const double a = age();
    ego_edges.push_back({0, u, kFriendshipType, a});
    ego_edges.push_back({u, 0, kFriendshipType, a});
    for (int t = 1; t < types; ++t) {
      if (draw.bernoulli(cfg.p_interaction)) ego_edges.push_back({0, u, t, activity(draw.bernoulli(cfg.hot_fraction))});
      if (draw.bernoulli(cfg.p_interaction)) ego_edges.push_back({u, 0, t, activity(draw.bernoulli(cfg.hot_fraction))});
    }
  }

  std::vector<std::uint8_t> hot(n * n, 0);
  std::vector<std::uint8_t> friends(n * n, 0);
  for (LocalId u = 1; u < n; ++u) {
    for (LocalId v = u + 1; v < n; ++v) {
      const double p = block[u] == block[v] ? cfg.p_friend_in : cfg.p_friend_out;
      if (!draw.bernoulli(p)) continue;
      friends[u * n + v] = friends[v * n + u] = 1;
      const bool is_hot = draw.bernoulli(cfg.hot_fraction);
      hot[u * n + v] = hot[v * n + u] = is_hot;
      const double a = age();
      e.edges.push_back({u, v, kFriendshipType, a});
      e.edges.push_back({v, u, kFriendshipType, a});
      for (int t = 1; t < types; ++t) {
        if (draw.bernoulli(cfg.p_interaction)) e.edges.push_back({u, v, t, activity(is_hot)});
        if (draw.bernoulli(cfg.p_interaction)) e.edges.push_back({v, u, t, activity(is_hot)});
      }
    }
  }
  for (LocalId u = 1; u < n; ++u) {
    for (LocalId v = 1; v < n; ++v) {
      if (u == v || friends[u * n + v]) continue;
      for (int t = 1; t < types; ++t) {
        if (draw.bernoulli(cfg.p_stray_interaction)) e.edges.push_back({u, v, t, activity(false)});
      }
    }
  }
  std::sort(e.edges.begin(), e.edges.end(), edge_less);
  derive_node_features(e, ego_edges);

  const auto connected = adjacency_mask(e);
  out.planted = RelevanceMatrix(n, kMaskedScore);
  std::vector<std::pair<LocalId, LocalId>> candidates;
  std::vector<double> weights;
  for (LocalId u = 1; u < n; ++u) {
    for (LocalId v = u + 1; v < n; ++v) {
      if (connected[u * n + v]) continue;
      int paths = 0;
      for (std::size_t q = 1; q < n; ++q) paths += hot[u * n + q] & hot[q * n + v];
      const double logit = cfg.path_weight * paths + (block[u] == block[v] ? cfg.block_weight : 0.0);
      out.planted(u, v) = out.planted(v, u) = logit;
      candidates.emplace_back(u, v);
      weights.push_back(std::exp(logit));
    }
  }
  const auto gt_count = static_cast<std::size_t>(
      cfg.min_gt + static_cast<int>(draw.below(static_cast<std::size_t>(cfg.max_gt - cfg.min_gt + 1))));
  // keep at least one negative so the ego-net is usable for ranking
  if (candidates.size() <= gt_count) return out;

  for (std::size_t g = 0; g < gt_count; ++g) {
    double total = 0.0;
    for (double w : weights) total += w;
    double target = draw.uniform() * total;
    std::size_t pick = 0;
    for (; pick + 1 < weights.size(); ++pick) {
      if (weights[pick] > 0.0 && target < weights[pick]) break;
      target -= weights[pick];
    }
    while (weights[pick] == 0.0) --pick;
    e.ground_truth.push_back(candidates[pick]);
    weights[pick] = 0.0;
  }
  std::sort(e.ground_truth.begin(), e.ground_truth.end());
  out.ok = true;
  return out;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
  validate(cfg);
  SyntheticDataset data;
  data.egonets.resize(cfg.n_egonets);
  data.planted.resize(cfg.n_egonets);
  for (std::size_t i = 0; i < cfg.n_egonets; ++i) {
    bool done = false;
    for (int attempt = 0; attempt <= cfg.max_retries && !done; ++attempt) {
      auto a = generate_one(cfg, i, attempt);
      if (!a.ok) continue;
      data.egonets[i] = std::move(a.egonet);
      data.planted[i] = std::move(a.planted);
      done = true;
    }
    if (!done) {
      throw std::runtime_error("synthetic ego-net " + std::to_string(i) + " has no feasible ground truth after " +
                               std::to_string(cfg.max_retries + 1) + " attempts");
    }
  }
  return data;
}

PlantedRuleModel::PlantedRuleModel(const SyntheticDataset& data) {
  for (std::size_t i = 0; i < data.egonets.size(); ++i) table_.emplace(data.egonets[i].ego, data.planted[i]);
}

RelevanceMatrix PlantedRuleModel::score(const EgoNet& e) const {
  auto it = table_.find(e.ego);
  if (it == table_.end() || it->second.n != e.size()) {
    throw std::invalid_argument("no planted scores for ego " + std::to_string(e.ego));
  }
  return it->second;
}

}  // namespace egoscore
