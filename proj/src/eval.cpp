#include "egoscore/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <random>
#include <stdexcept>

#include "egoscore/bloom.hpp"
#include "egoscore/walkgnn.hpp"

namespace egoscore {

std::vector<std::pair<LocalId, LocalId>> top_k_pairs(const RelevanceMatrix& scores, const EgoNet& e, std::size_t k) {
  const std::size_t n = e.size();
  if (scores.n != n) throw std::invalid_argument("score matrix size does not match the ego-net");
  const auto mask = candidate_mask(e);
  struct Ranked {
    double score;
    LocalId u, v;
  };
  std::vector<Ranked> ranked;
  for (LocalId u = 1; u < n; ++u) {
    for (LocalId v = u + 1; v < n; ++v) {
      if (mask[u * n + v]) continue;
      ranked.push_back({std::max(scores(u, v), scores(v, u)), u, v});
    }
  }
  auto better = [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  };
  const std::size_t take = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end(), better);
  std::vector<std::pair<LocalId, LocalId>> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.emplace_back(ranked[i].u, ranked[i].v);
  return out;
}

double ndcg_from_hits(std::span<const bool> hits, std::size_t relevant) {
  if (relevant == 0) throw std::invalid_argument("NDCG needs at least one relevant item");
  double dcg = 0.0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(hits.size(), relevant); ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double ndcg_at_k(const RelevanceMatrix& scores, const EgoNet& e, std::size_t k) {
  if (e.ground_truth.empty()) throw std::invalid_argument("ndcg needs a non-empty ground truth");
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  const auto top = top_k_pairs(scores, e, k);
  // hits padded to k so IDCG counts min(k, |GT|) slots even if fewer candidates exist
  auto hits = std::make_unique<bool[]>(k);
  for (std::size_t i = 0; i < top.size(); ++i) {
    hits[i] = std::find(e.ground_truth.begin(), e.ground_truth.end(), top[i]) != e.ground_truth.end();
  }
  return ndcg_from_hits({hits.get(), k}, e.ground_truth.size());
}

EvalReport summarize(std::string metric, std::vector<double> values, std::size_t bootstrap_samples,
                     std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty score list");
  EvalReport report;
  report.metric = std::move(metric);
  report.n_egonets = values.size();
  double total = 0.0;
  for (double v : values) total += v;
  report.mean = total / static_cast<double>(values.size());
  report.ci_low = report.ci_high = report.mean;
  if (bootstrap_samples > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    std::vector<double> means(bootstrap_samples);
    for (auto& m : means) {
      double s = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) s += values[pick(rng)];
      m = s / static_cast<double>(values.size());
    }
    std::sort(means.begin(), means.end());
    const auto lo = static_cast<std::size_t>(std::floor(0.025 * static_cast<double>(bootstrap_samples)));
    const auto hi = std::min(bootstrap_samples - 1,
                             static_cast<std::size_t>(std::ceil(0.975 * static_cast<double>(bootstrap_samples))) - 1);
    report.ci_low = std::min(means[lo], report.mean);
    report.ci_high = std::max(means[hi], report.mean);
  }
  report.per_egonet = std::move(values);
  return report;
}

EvalReport evaluate(const InEgoModel& model, std::span<const EgoNet> egonets, std::size_t k,
                    std::size_t bootstrap_samples, std::uint64_t seed) {
  if (egonets.empty()) throw std::invalid_argument("evaluate needs at least one ego-net");
  std::vector<double> values(egonets.size());
  for (const auto& e : egonets) {
    if (e.ground_truth.empty()) throw std::invalid_argument("ego-net " + std::to_string(e.ego) + " has no ground truth");
  }
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(egonets.size()); ++i) {
    const auto& e = egonets[static_cast<std::size_t>(i)];
    values[static_cast<std::size_t>(i)] = ndcg_at_k(model.score(e), e, k);
  }
  return summarize("ndcg@" + std::to_string(k), std::move(values), bootstrap_samples, seed);
}

void write_report(std::ostream& out, const EvalReport& r) {
  out << std::left << std::setw(12) << "metric" << std::setw(12) << "mean" << std::setw(12) << "ci_low"
      << std::setw(12) << "ci_high" << "n_egonets\n";
  out << std::fixed << std::setprecision(6) << std::setw(12) << r.metric << std::setw(12) << r.mean << std::setw(12)
      << r.ci_low << std::setw(12) << r.ci_high << r.n_egonets << "\n\n";
  out.unsetf(std::ios::floatfield);
  out << "metric=" << r.metric << '\n'
      << "mean=" << format_real(r.mean) << '\n'
      << "ci_low=" << format_real(r.ci_low) << '\n'
      << "ci_high=" << format_real(r.ci_high) << '\n'
      << "n_egonets=" << r.n_egonets << '\n';
}

int split_bucket(NodeId ego, const std::array<double, 3>& ratios, std::uint64_t seed) {
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(total - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0) {
    throw std::invalid_argument("split ratios must be non-negative and sum to 1");
  }
  const double x = static_cast<double>(hash_pair(ego, 0x5b1f, seed) >> 11) * 0x1.0p-53;
  if (x < ratios[0]) return 0;
  if (x < ratios[0] + ratios[1]) return 1;
  return 2;
}

DatasetSplit split_dataset(std::vector<EgoNet> egonets, const std::array<double, 3>& ratios, std::uint64_t seed) {
  DatasetSplit split;
  for (auto& e : egonets) {
    switch (split_bucket(e.ego, ratios, seed)) {
      case 0: split.train.push_back(std::move(e)); break;
      case 1: split.valid.push_back(std::move(e)); break;
      default: split.test.push_back(std::move(e)); break;
    }
  }
  return split;
}

}  // namespace egoscore
