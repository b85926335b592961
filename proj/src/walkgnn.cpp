#include "egoscore/walkgnn.hpp"

#include <algorithm>
#include <cmath>

namespace egoscore {

void validate(const WalkGnnConfig& cfg) {
  if (cfg.layers < 1) throw std::invalid_argument("WalkGNN needs at least one layer");
  if (cfg.hidden < 1) throw std::invalid_argument("WalkGNN hidden size must be >= 1");
  if (cfg.mlp_depth < 1) throw std::invalid_argument("mlp_depth must be >= 1");
  if (cfg.mlp_hidden < 1) throw std::invalid_argument("mlp_hidden must be >= 1");
  if (cfg.num_types < 1) throw std::invalid_argument("num_types must be >= 1");
}

// ---------------------------------------------------------------------------

Mlp::Mlp(std::string prefix, std::vector<std::size_t> dims) : prefix_(std::move(prefix)), dims_(std::move(dims)) {
  if (dims_.size() < 2) throw std::invalid_argument("an MLP needs at least one layer");
  slots_.assign(dims_.size() - 1, {0, 0});
}

namespace {

std::string weight_name(const std::string& prefix, std::size_t i) { return prefix + "." + std::to_string(i) + ".weight"; }
std::string bias_name(const std::string& prefix, std::size_t i) { return prefix + "." + std::to_string(i) + ".bias"; }

}  // namespace

void Mlp::init(ParamStore& params, std::mt19937_64& rng, bool zero_last) const {
  const std::size_t layers = dims_.size() - 1;
  for (std::size_t i = 0; i < layers; ++i) {
    const std::size_t fan_in = dims_[i], fan_out = dims_[i + 1];
    Tensor w({fan_in, fan_out});
    if (!(zero_last && i + 1 == layers)) {
      const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      std::uniform_real_distribution<double> dist(-a, a);
      for (double& x : w.data()) x = dist(rng);
    }
    params.add(weight_name(prefix_, i), std::move(w));
    params.add(bias_name(prefix_, i), Tensor({fan_out}));
  }
}

void Mlp::bind(const ParamStore& params) {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const auto wi = params.index_of(weight_name(prefix_, i));
    const auto bi = params.index_of(bias_name(prefix_, i));
    const auto& w = params[wi].value;
    const auto& b = params[bi].value;
    if (w.shape() != std::vector<std::size_t>{dims_[i], dims_[i + 1]} ||
        b.shape() != std::vector<std::size_t>{dims_[i + 1]}) {
      throw std::invalid_argument("parameter " + weight_name(prefix_, i) + " has the wrong shape");
    }
    slots_[i] = {wi, bi};
  }
}

Tape::Var Mlp::apply(Tape& tape, const ParamStore& params, ParamStore* grads, Tape::Var x) const {
  auto track = [&](std::size_t idx) { return grads ? &(*grads)[idx] : nullptr; };
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const auto [wi, bi] = slots_[i];
    auto w = tape.parameter(params[wi], track(wi));
    auto b = tape.parameter(params[bi], track(bi));
    x = ad::linear(tape, x, w, b);
    if (i + 1 < slots_.size()) x = ad::relu(tape, x);
  }
  return x;
}

// ---------------------------------------------------------------------------

EdgeFeatures assemble_edge_features(const EgoNet& e, bool edge_attrs, bool node_features) {
  const std::size_t t_count = static_cast<std::size_t>(e.num_types);
  const std::size_t f = node_features ? e.feature_width() : 0;
  const std::size_t width = t_count + 2 * f;

  std::vector<TypedEdge> edges = e.edges;
  std::sort(edges.begin(), edges.end(), edge_less);
  EdgeFeatures out;
  std::vector<double> rows;
  for (std::size_t i = 0; i < edges.size();) {
    const auto src = static_cast<std::uint32_t>(edges[i].src);
    const auto dst = static_cast<std::uint32_t>(edges[i].dst);
    out.cells.emplace_back(src, dst);
    const std::size_t base = rows.size();
    rows.resize(base + width, 0.0);
    for (; i < edges.size() && edges[i].src == src && edges[i].dst == dst; ++i) {
      const auto& edge = edges[i];
      rows[base + static_cast<std::size_t>(edge.etype)] = edge_attrs ? transformed_attr(edge.etype, edge.attr) : 1.0;
    }
    if (f > 0) {
      std::copy_n(e.node_features.row(src).data(), f, rows.begin() + static_cast<std::ptrdiff_t>(base + t_count));
      std::copy_n(e.node_features.row(dst).data(), f, rows.begin() + static_cast<std::ptrdiff_t>(base + t_count + f));
    }
  }
  out.rows = Tensor({out.cells.size(), width}, std::move(rows));
  return out;
}

Tape::Var walk_conv(Tape& tape, Tape::Var state, Tape::Var filters, const Mlp* mlp, const ParamStore* params,
                    ParamStore* grads, const WalkConvOptions& opt) {
  auto w = ad::walk_contract(tape, state, filters, opt.d, 1.0 / static_cast<double>(opt.d));
  if (opt.directed_concat) w = ad::concat_transpose(tape, w);
  if (mlp) {
    if (!params) throw std::invalid_argument("walk_conv: MLP given without parameters");
    w = mlp->apply(tape, *params, grads, w);
  }
  if (!opt.residual) return w;
  if (tape.value(w).shape() != tape.value(state).shape()) {
    throw std::invalid_argument("walk_conv: residual needs the MLP to restore the state width");
  }
  return ad::add(tape, state, w);
}

std::vector<std::uint8_t> candidate_mask(const EgoNet& e) {
  const std::size_t n = e.size();
  auto mask = adjacency_mask(e);
  for (std::size_t u = 0; u < n; ++u) {
    mask[u * n + u] = 1;
    mask[u] = 1;
    mask[u * n] = 1;
  }
  return mask;
}

// ---------------------------------------------------------------------------

WalkGnn::WalkGnn(WalkGnnConfig cfg) : cfg_(cfg) {
  validate(cfg_);
  const auto d = static_cast<std::size_t>(cfg_.hidden);
  const auto h = static_cast<std::size_t>(cfg_.mlp_hidden);
  auto dims = [&](std::size_t in, std::size_t out) {
    std::vector<std::size_t> v{in};
    for (int i = 1; i < cfg_.mlp_depth; ++i) v.push_back(h);
    v.push_back(out);
    return v;
  };
  for (int k = 0; k < cfg_.layers; ++k) {
    const std::string layer = "layer" + std::to_string(k);
    edge_mlps_.emplace_back(layer + ".edge_mlp", dims(edge_input_width(), d * d));
    layer_mlps_.emplace_back(layer + ".mlp", dims(cfg_.directed_concat ? 2 * d : d, d));
  }
  out_mlp_ = Mlp("out_mlp", dims(d, 1));
}

std::size_t WalkGnn::edge_input_width() const {
  const auto t = static_cast<std::size_t>(cfg_.num_types);
  return cfg_.node_features ? t + 4 * t : t;
}

ParamStore WalkGnn::init_params() const {
  ParamStore params;
  std::mt19937_64 rng(cfg_.seed);
  for (int k = 0; k < cfg_.layers; ++k) {
    edge_mlps_[static_cast<std::size_t>(k)].init(params, rng, false);
    layer_mlps_[static_cast<std::size_t>(k)].init(params, rng, cfg_.zero_init_layer_output);
  }
  out_mlp_.init(params, rng, false);
  return params;
}

void WalkGnn::check_params(const ParamStore& params) const {
  if (params.empty()) throw std::invalid_argument("WalkGNN parameters are not initialized");
  // binding on copies validates names and shapes without mutating this model
  try {
    for (auto m : edge_mlps_) m.bind(params);
    for (auto m : layer_mlps_) m.bind(params);
    Mlp out = out_mlp_;
    out.bind(params);
  } catch (const std::out_of_range& err) {
    throw std::invalid_argument(std::string("parameters do not match the architecture: ") + err.what());
  }
}

Tape::Var WalkGnn::forward(Tape& tape, const EgoNet& e, const ParamStore& params, ParamStore* grads) const {
  if (e.num_types != cfg_.num_types) throw std::invalid_argument("ego-net edge type count does not match the model");
  if (params.empty()) throw std::invalid_argument("WalkGNN parameters are not initialized");
  // Resolve parameter slots against this store. Layouts produced by
  // init_params()/load_checkpoint() share indices, so a bound copy is cheap.
  auto bound = [&](const Mlp& m) {
    Mlp b = m;
    b.bind(params);
    return b;
  };

  const std::size_t n = e.size();
  const auto d = static_cast<std::size_t>(cfg_.hidden);
  const auto features = assemble_edge_features(e, cfg_.edge_attrs, cfg_.node_features);
  auto x = tape.constant(features.rows);

  Tensor s0({n, n, d});
  for (std::size_t u = 0; u < n; ++u) {
    double* cell = s0.ptr() + (u * n + u) * d;
    std::fill(cell, cell + d, 1.0);
    if (cfg_.node_features) {
      const std::size_t c_max = std::min(e.feature_width(), d);
      for (std::size_t c = 0; c < c_max; ++c) cell[c] = e.node_features(u, c);
    }
  }
  auto state = tape.constant(std::move(s0));

  const WalkConvOptions opt{d, cfg_.directed_concat, cfg_.residual};
  for (std::size_t k = 0; k < edge_mlps_.size(); ++k) {
    const Mlp edge_mlp = bound(edge_mlps_[k]);
    const Mlp layer_mlp = bound(layer_mlps_[k]);
    auto rows = edge_mlp.apply(tape, params, grads, x);
    auto filters = ad::scatter_pairs(tape, rows, features.cells, n);
    state = walk_conv(tape, state, filters, &layer_mlp, &params, grads, opt);
  }
  return bound(out_mlp_).apply(tape, params, grads, state);
}

RelevanceMatrix WalkGnn::score(const EgoNet& e, const ParamStore& params) const {
  Tape tape;
  const auto out = forward(tape, e, params, nullptr);
  const Tensor& raw = tape.value(out);
  const std::size_t n = e.size();
  RelevanceMatrix m(n);
  const auto mask = candidate_mask(e);
  for (std::size_t i = 0; i < n * n; ++i) m.scores[i] = mask[i] ? kMaskedScore : raw[i];
  return m;
}

WalkGnnModel::WalkGnnModel(WalkGnnConfig cfg, ParamStore params) : net_(cfg), params_(std::move(params)) {
  net_.check_params(params_);
}

// ---------------------------------------------------------------------------

std::vector<ad::RankPair> sample_rank_pairs(const EgoNet& e, int negatives, std::mt19937_64& rng) {
  if (e.ground_truth.empty()) throw std::invalid_argument("pairwise loss needs ground truth");
  if (negatives < 1) throw std::invalid_argument("negatives per positive must be >= 1");
  const std::size_t n = e.size();
  const auto mask = candidate_mask(e);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pool;
  for (std::uint32_t u = 1; u < n; ++u) {
    for (std::uint32_t v = u + 1; v < n; ++v) {
      if (mask[u * n + v]) continue;
      const bool positive = std::find(e.ground_truth.begin(), e.ground_truth.end(), std::pair<LocalId, LocalId>{u, v}) !=
                            e.ground_truth.end();
      if (!positive) pool.emplace_back(u, v);
    }
  }
  if (pool.empty()) throw std::invalid_argument("no negative candidate pairs");
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<ad::RankPair> pairs;
  pairs.reserve(e.ground_truth.size() * static_cast<std::size_t>(negatives));
  for (const auto& [pu, pv] : e.ground_truth) {
    for (int j = 0; j < negatives; ++j) {
      const auto& [nu, nv] = pool[pick(rng)];
      pairs.push_back({pu, pv, nu, nv});
    }
  }
  return pairs;
}

double pairwise_loss(const RelevanceMatrix& scores, const std::vector<ad::RankPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("pairwise loss over an empty pair set");
  auto sym = [&](std::uint32_t u, std::uint32_t v) { return std::max(scores(u, v), scores(v, u)); };
  double total = 0.0;
  for (const auto& p : pairs) total += softplus(-(sym(p.pos_u, p.pos_v) - sym(p.neg_u, p.neg_v)));
  return total / static_cast<double>(pairs.size());
}

std::vector<std::uint64_t> walk_count_mode(const EgoNet& e, int k) {
  if (k < 1) throw std::invalid_argument("walk length must be >= 1");
  const std::size_t n = e.size();
  Tensor identity({n, n, 1});
  for (std::size_t u = 0; u < n; ++u) identity[u * n + u] = 1.0;
  Tensor filters({n, n, 1});
  for (const auto& edge : e.edges) filters[edge.src * n + edge.dst] = 1.0;

  constexpr double kExactLimit = 9007199254740992.0;  // 2^53
  Tape tape;
  auto state = tape.constant(std::move(identity));
  const auto adjacency = tape.constant(std::move(filters));
  for (int step = 0; step < k; ++step) {
    state = walk_conv(tape, state, adjacency, nullptr, nullptr, nullptr, WalkConvOptions{1, false, false});
    for (double c : tape.value(state).data()) {
      if (c > kExactLimit) throw std::overflow_error("walk count exceeds 2^53");
    }
  }
  std::vector<std::uint64_t> counts(n * n);
  const auto& final_state = tape.value(state);
  for (std::size_t i = 0; i < n * n; ++i) counts[i] = static_cast<std::uint64_t>(final_state[i]);
  return counts;
}

}  // namespace egoscore
