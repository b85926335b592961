#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "egoscore/graph.hpp"
#include "egoscore/heuristics.hpp"

namespace egoscore {

/// Planted link-formation rule: a candidate pair (u, v) with no base edge
/// forms a friendship with probability proportional to
///   exp(path_weight * #hot 2-paths u-q-v + block_weight * [same block]),
/// where a friendship is hot when its interaction volume is drawn from the
/// high-activity range. Interaction presence is independent of hotness, so
/// only attribute values reveal which edges are hot.
struct SyntheticConfig {
  std::size_t n_egonets = 100;
  std::size_t min_nodes = 16;  // members including the ego
  std::size_t max_nodes = 26;
  int num_types = kDefaultEdgeTypes;
  int min_blocks = 2;
  int max_blocks = 4;
  double p_friend_in = 0.45;
  double p_friend_out = 0.1;
  double p_interaction = 0.8;  // per friendship direction and interaction type
  double p_stray_interaction = 0.03;
  double hot_fraction = 0.25;
  double hot_low = 3.0, hot_high = 6.0;
  double cold_low = 0.1, cold_high = 1.0;
  double max_age_days = 1000.0;
  double path_weight = 8.0;
  double block_weight = 1.0;
  int min_gt = 1;
  int max_gt = 2;
  std::uint64_t seed = 0;
  int max_retries = 16;
  NodeId id_offset = 0;
};

void validate(const SyntheticConfig& cfg);

/// JSON object with any subset of the config keys.
SyntheticConfig load_synthetic_config(const std::filesystem::path& path);
SyntheticConfig parse_synthetic_config(const std::string& json_text);

struct SyntheticDataset {
  std::vector<EgoNet> egonets;
  /// Planted logit of every candidate pair (masked cells hold kMaskedScore).
  std::vector<RelevanceMatrix> planted;
};

/// Deterministic given cfg.seed. Ego-nets without enough candidate pairs are
/// regenerated with a fresh sub-seed up to cfg.max_retries times.
SyntheticDataset generate_synthetic(const SyntheticConfig& cfg);

/// Scores ego-nets with the generator's own logits, looked up by ego id.
class PlantedRuleModel final : public InEgoModel {
 public:
  explicit PlantedRuleModel(const SyntheticDataset& data);
  std::string name() const override { return "planted"; }
  RelevanceMatrix score(const EgoNet& e) const override;

 private:
  std::unordered_map<NodeId, RelevanceMatrix> table_;
};

}  // namespace egoscore
