#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "egoscore/egonet_builder.hpp"
#include "egoscore/graph.hpp"
#include "egoscore/heuristics.hpp"

namespace egoscore {

/// Relevance of the pair (u, v), u < v, within the ego-net of `ego`.
struct LocalScore {
  NodeId u = 0;
  NodeId v = 0;
  NodeId ego = 0;
  double score = 0.0;

  friend bool operator==(const LocalScore&, const LocalScore&) = default;
};

enum class AggregatorKind { sum, max };

AggregatorKind parse_aggregator(std::string_view name);
std::string_view to_string(AggregatorKind kind);

struct ScoreStats {
  std::size_t egonets = 0;
  std::size_t failed = 0;
  std::size_t emitted = 0;
};

struct ScoreOptions {
  /// Skip pairs already joined by a base edge.
  bool mask_base_edges = true;
  /// Ego-nets scored concurrently before their scores are emitted in input order.
  std::size_t chunk = 256;
};

using LocalScoreSink = std::function<void(const LocalScore&)>;

/// Scores every ego-net and emits one LocalScore per candidate pair, in input
/// order, symmetrized by max. Ego-nets whose model call throws or yields a
/// non-finite score are logged, skipped and counted.
ScoreStats score_egonets(std::span<const EgoNet> egonets, const InEgoModel& model, const LocalScoreSink& sink,
                         const ScoreOptions& opt = {});
std::vector<LocalScore> score_egonets(std::span<const EgoNet> egonets, const InEgoModel& model,
                                      const ScoreOptions& opt = {});

struct GlobalScore {
  NodeId u = 0;
  NodeId v = 0;
  double score = 0.0;
  std::uint32_t support = 0;  // number of local scores folded

  friend bool operator==(const GlobalScore&, const GlobalScore&) = default;
};

/// External-memory fold of local scores into one score per pair.
///
/// Records are buffered, spilled as sorted runs once `run_capacity` is
/// reached, and merge-folded in (u, v, ego, score) order, so the result is
/// bit-identical for any input order or partitioning.
class PairAggregator {
 public:
  explicit PairAggregator(AggregatorKind kind, std::size_t run_capacity = std::size_t{1} << 20,
                          std::filesystem::path spill_dir = {});
  ~PairAggregator();
  PairAggregator(const PairAggregator&) = delete;
  PairAggregator& operator=(const PairAggregator&) = delete;

  void add(const LocalScore& s);
  std::size_t spilled_runs() const { return runs_.size(); }

  /// Streams folded pairs in (u, v) order. The aggregator is empty afterwards.
  void finish(const std::function<void(const GlobalScore&)>& out);
  std::vector<GlobalScore> finish();

 private:
  void spill();

  AggregatorKind kind_;
  std::size_t capacity_;
  std::filesystem::path dir_;
  bool own_dir_ = false;
  std::vector<LocalScore> buffer_;
  std::vector<std::filesystem::path> runs_;
};

std::vector<GlobalScore> aggregate(std::span<const LocalScore> locals, AggregatorKind kind);

struct Suggestion {
  NodeId user = 0;
  NodeId counterpart = 0;
  std::uint32_t rank = 0;  // 1-based
  double score = 0.0;

  friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

/// Per user, the k best counterparts not connected to it by any edge;
/// ordered by (score desc, counterpart asc). Output sorted by (user, rank).
std::vector<Suggestion> top_k_suggestions(std::span<const GlobalScore> scores, const Graph& g, std::size_t k);

struct RunStats {
  std::size_t egonets = 0;
  ScoreStats scoring;
  std::size_t pairs = 0;
};

/// Ego-net construction, in-ego scoring, out-ego aggregation and top-k.
std::vector<Suggestion> run_gefs(const Graph& g, const InEgoModel& model, AggregatorKind kind,
                                 const BuilderConfig& cfg, std::size_t k, RunStats* stats = nullptr,
                                 const ScoreOptions& opt = {});

/// Lines `ego u v score` with global ids.
void write_local_scores(std::ostream& out, std::span<const LocalScore> scores);

/// Lines `user counterpart rank score`.
void write_suggestions(std::ostream& out, std::span<const Suggestion> suggestions);

}  // namespace egoscore
