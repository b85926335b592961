#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "egoscore/autodiff.hpp"
#include "egoscore/graph.hpp"
#include "egoscore/heuristics.hpp"

namespace egoscore {

/// Sentinel written into masked score cells.
inline constexpr double kMaskedScore = -1e30;

struct WalkGnnConfig {
  int layers = 6;
  int hidden = 8;  // d
  int mlp_depth = 4;
  int mlp_hidden = 32;
  int num_types = kDefaultEdgeTypes;
  bool directed_concat = true;
  bool residual = true;
  /// Inject node features into the initial state and the edge vectors.
  bool node_features = true;
  /// Use edge attribute values; when off the edge vector only says which types are present.
  bool edge_attrs = true;
  /// Zero the last layer of every per-layer MLP at init, so S_l = S_0 before training.
  /// Off by default: with zero biases that start is a stationary point of the loss.
  bool zero_init_layer_output = false;
  std::uint64_t seed = 0;

  friend bool operator==(const WalkGnnConfig&, const WalkGnnConfig&) = default;
};

void validate(const WalkGnnConfig& cfg);

/// Stack of linear layers with ReLU between them and a linear output.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string prefix, std::vector<std::size_t> dims);

  /// Registers weights uniform in [-a, a], a = sqrt(6 / (fan_in + fan_out)); biases zero.
  void init(ParamStore& params, std::mt19937_64& rng, bool zero_last) const;
  /// Resolves parameter indices in `params`; throws if missing or mis-shaped.
  void bind(const ParamStore& params);

  Tape::Var apply(Tape& tape, const ParamStore& params, ParamStore* grads, Tape::Var x) const;

  std::size_t in_dim() const { return dims_.front(); }
  std::size_t out_dim() const { return dims_.back(); }

 private:
  std::string prefix_;
  std::vector<std::size_t> dims_;
  std::vector<std::pair<std::size_t, std::size_t>> slots_;  // (weight, bias) indices
};

/// Per directed member pair (q, v) with at least one edge q -> v, the merged edge vector
/// [per-type attribute slots | node_features[q] | node_features[v]].
struct EdgeFeatures {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> cells;
  Tensor rows;  // [cells.size(), width]
};

/// edge_attrs=false replaces attribute values with 1.0 type-presence flags;
/// node_features=false drops the endpoint feature blocks.
EdgeFeatures assemble_edge_features(const EgoNet& e, bool edge_attrs = true, bool node_features = true);

struct WalkConvOptions {
  std::size_t d = 1;
  bool directed_concat = false;
  bool residual = false;
};

/// One WalkConv step: W = (1/d) S x T, optionally concatenated with its
/// (u, v)-transpose, passed through `mlp` (identity when null) and added to S
/// when residual.
Tape::Var walk_conv(Tape& tape, Tape::Var state, Tape::Var filters, const Mlp* mlp, const ParamStore* params,
                    ParamStore* grads, const WalkConvOptions& opt);

/// n x n n x n mask: 1 where a pair is never a candidate (ego, diagonal, existing base edge).
std::vector<std::uint8_t> candidate_mask(const EgoNet& e);

class WalkGnn {
 public:
  explicit WalkGnn(WalkGnnConfig cfg);

  const WalkGnnConfig& config() const { return cfg_; }
  std::size_t edge_input_width() const;

  /// Fresh seeded parameters for this architecture.
  ParamStore init_params() const;
  /// Throws std::invalid_argument unless `params` holds every tensor of this architecture.
  void check_params(const ParamStore& params) const;

  /// Raw [n, n] pair scores (no mask). Gradients go to `grads` when non-null.
  Tape::Var forward(Tape& tape, const EgoNet& e, const ParamStore& params, ParamStore* grads) const;

  /// Masked relevance matrix for ranking.
  RelevanceMatrix score(const EgoNet& e, const ParamStore& params) const;

 private:
  WalkGnnConfig cfg_;
  std::vector<Mlp> edge_mlps_;
  std::vector<Mlp> layer_mlps_;
  Mlp out_mlp_;
};

/// InEgoModel adapter over a trained parameter set.
class WalkGnnModel final : public InEgoModel {
 public:
  WalkGnnModel(WalkGnnConfig cfg, ParamStore params);
  std::string name() const override { return "walkgnn"; }
  RelevanceMatrix score(const EgoNet& e) const override { return net_.score(e, params_); }

  const WalkGnn& net() const { return net_; }
  const ParamStore& params() const { return params_; }

 private:
  WalkGnn net_;
  ParamStore params_;
};

/// Positive/negative pairs for the ranking loss: each ground-truth pair
/// against `negatives` pairs drawn uniformly (with replacement) from the
/// unmasked non-ground-truth pairs. Throws on empty ground truth or no negatives.
std::vector<ad::RankPair> sample_rank_pairs(const EgoNet& e, int negatives, std::mt19937_64& rng);

/// Mean ln(1 + exp(-(s_p - s_q))) over the sampled pairs.
double pairwise_loss(const RelevanceMatrix& scores, const std::vector<ad::RankPair>& pairs);

/// Exact directed k-walk counts between all member pairs, computed with the
/// WalkConv contraction at d = 1 with identity filters on every edge.
/// Throws std::overflow_error once a count exceeds 2^53.
std::vector<std::uint64_t> walk_count_mode(const EgoNet& e, int k);

}  // namespace egoscore
