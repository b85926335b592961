#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "egoscore/graph.hpp"
#include "egoscore/heuristics.hpp"

namespace egoscore {

/// Top-k candidate pairs (u < v) of an ego-net. A pair is a candidate unless
/// it touches the ego or has a base edge; its score is the larger of the two
/// directed entries. Ties go to the smaller (u, v).
std::vector<std::pair<LocalId, LocalId>> top_k_pairs(const RelevanceMatrix& scores, const EgoNet& e, std::size_t k);

/// Binary-relevance NDCG from a ranked hit list: sum_{i: hit} 1/log2(i+1) over
/// IDCG with min(k, relevant) hits.
double ndcg_from_hits(std::span<const bool> hits, std::size_t relevant);

/// NDCG@k of `scores` against e.ground_truth. Throws on empty ground truth.
double ndcg_at_k(const RelevanceMatrix& scores, const EgoNet& e, std::size_t k = 5);

struct EvalReport {
  std::string metric;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> per_egonet;
  std::size_t n_egonets = 0;
};

/// Mean of `values` with a percentile-bootstrap 95% interval.
EvalReport summarize(std::string metric, std::vector<double> values, std::size_t bootstrap_samples,
                     std::uint64_t seed);

/// Mean NDCG@k over ego-nets with a bootstrap 95% interval. Throws on an empty set.
EvalReport evaluate(const InEgoModel& model, std::span<const EgoNet> egonets, std::size_t k = 5,
                    std::size_t bootstrap_samples = 1000, std::uint64_t seed = 0);

/// Human-readable table followed by a `key=value` block.
void write_report(std::ostream& out, const EvalReport& report);

struct DatasetSplit {
  std::vector<EgoNet> train, valid, test;
};

/// Bucket (0 train, 1 valid, 2 test) of an ego id; depends only on (ego, seed).
int split_bucket(NodeId ego, const std::array<double, 3>& ratios, std::uint64_t seed);

DatasetSplit split_dataset(std::vector<EgoNet> egonets, const std::array<double, 3>& ratios, std::uint64_t seed);

}  // namespace egoscore
