#include "egoscore/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>

#include <spdlog/spdlog.h>

namespace egoscore {

AggregatorKind parse_aggregator(std::string_view name) {
  if (name == "sum") return AggregatorKind::sum;
  if (name == "max") return AggregatorKind::max;
  throw std::invalid_argument("unknown aggregator '" + std::string(name) + "' (expected sum or max)");
}

std::string_view to_string(AggregatorKind kind) { return kind == AggregatorKind::sum ? "sum" : "max"; }

namespace {

struct EgoResult {
  std::vector<LocalScore> scores;
  bool failed = false;
};

EgoResult score_one(const EgoNet& e, const InEgoModel& model, bool mask_base_edges) {
  EgoResult out;
  const std::size_t n = e.size();
  RelevanceMatrix m;
  try {
    m = model.score(e);
    if (m.n != n || m.scores.size() != n * n) throw std::runtime_error("score matrix has the wrong size");
  } catch (const std::exception& ex) {
    spdlog::warn("ego-net {} failed: {}", e.ego, ex.what());
    out.failed = true;
    return out;
  }
  const auto mask = mask_base_edges ? adjacency_mask(e) : std::vector<std::uint8_t>(n * n, 0);
  for (LocalId a = 1; a < n; ++a) {
    for (LocalId b = a + 1; b < n; ++b) {
      if (mask[a * n + b]) continue;
      const double s = std::max(m(a, b), m(b, a));
      if (!std::isfinite(s)) {
        spdlog::warn("ego-net {} failed: non-finite score for local pair ({}, {})", e.ego, a, b);
        out.scores.clear();
        out.failed = true;
        return out;
      }
      NodeId u = e.local_to_global[a], v = e.local_to_global[b];
      if (u > v) std::swap(u, v);
      out.scores.push_back({u, v, e.ego, s});
    }
  }
  return out;
}

bool record_less(const LocalScore& a, const LocalScore& b) {
  if (a.u != b.u) return a.u < b.u;
  if (a.v != b.v) return a.v < b.v;
  if (a.ego != b.ego) return a.ego < b.ego;
  return a.score < b.score;
}

}  // namespace

ScoreStats score_egonets(std::span<const EgoNet> egonets, const InEgoModel& model, const LocalScoreSink& sink,
                         const ScoreOptions& opt) {
  ScoreStats stats;
  const std::size_t chunk = std::max<std::size_t>(opt.chunk, 1);
  std::vector<EgoResult> results;
  for (std::size_t begin = 0; begin < egonets.size(); begin += chunk) {
    const std::size_t end = std::min(egonets.size(), begin + chunk);
    results.assign(end - begin, {});
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(end - begin); ++i) {
      results[static_cast<std::size_t>(i)] = score_one(egonets[begin + static_cast<std::size_t>(i)], model,
                                                       opt.mask_base_edges);
    }
    for (const auto& r : results) {
      ++stats.egonets;
      if (r.failed) ++stats.failed;
      for (const auto& s : r.scores) sink(s);
      stats.emitted += r.scores.size();
    }
  }
  if (stats.failed) spdlog::warn("{} of {} ego-nets failed and were skipped", stats.failed, stats.egonets);
  return stats;
}

std::vector<LocalScore> score_egonets(std::span<const EgoNet> egonets, const InEgoModel& model,
                                      const ScoreOptions& opt) {
  std::vector<LocalScore> out;
  score_egonets(egonets, model, [&](const LocalScore& s) { out.push_back(s); }, opt);
  return out;
}

// ---------------------------------------------------------------------------

PairAggregator::PairAggregator(AggregatorKind kind, std::size_t run_capacity, std::filesystem::path spill_dir)
    : kind_(kind), capacity_(std::max<std::size_t>(run_capacity, 1)), dir_(std::move(spill_dir)) {}

PairAggregator::~PairAggregator() {
  std::error_code ec;
  for (const auto& run : runs_) std::filesystem::remove(run, ec);
  if (own_dir_) std::filesystem::remove_all(dir_, ec);
}

void PairAggregator::add(const LocalScore& s) {
  if (s.u >= s.v) throw std::invalid_argument("local score pair is not canonical (u < v)");
  buffer_.push_back(s);
  if (buffer_.size() >= capacity_) spill();
}

void PairAggregator::spill() {
  if (buffer_.empty()) return;
  if (dir_.empty()) {
    std::random_device rd;
    const auto tag = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    dir_ = std::filesystem::temp_directory_path() / ("egoscore-agg-" + std::to_string(tag));
    std::filesystem::create_directories(dir_);
    own_dir_ = true;
  }
  std::sort(buffer_.begin(), buffer_.end(), record_less);
  auto path = dir_ / ("run-" + std::to_string(runs_.size()) + ".bin");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create spill file " + path.string());
  out.write(reinterpret_cast<const char*>(buffer_.data()),
            static_cast<std::streamsize>(buffer_.size() * sizeof(LocalScore)));
  if (!out) throw std::runtime_error("failed writing spill file " + path.string());
  runs_.push_back(std::move(path));
  buffer_.clear();
}

namespace {

class RunReader {
 public:
  explicit RunReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open spill file " + path.string());
    advance();
  }
  const std::optional<LocalScore>& head() const { return head_; }
  void advance() {
    LocalScore s;
    if (in_.read(reinterpret_cast<char*>(&s), sizeof(s))) {
      head_ = s;
    } else {
      head_.reset();
    }
  }

 private:
  std::ifstream in_;
  std::optional<LocalScore> head_;
};

}  // namespace

void PairAggregator::finish(const std::function<void(const GlobalScore&)>& out) {
  std::sort(buffer_.begin(), buffer_.end(), record_less);
  std::vector<RunReader> readers;
  readers.reserve(runs_.size());
  for (const auto& run : runs_) readers.emplace_back(run);

  // source index runs_.size() is the in-memory buffer
  const std::size_t mem = readers.size();
  std::size_t mem_pos = 0;
  auto head = [&](std::size_t src) -> const LocalScore* {
    if (src == mem) return mem_pos < buffer_.size() ? &buffer_[mem_pos] : nullptr;
    return readers[src].head() ? &*readers[src].head() : nullptr;
  };
  auto cmp = [&](std::size_t a, std::size_t b) {
    const LocalScore& x = *head(a);
    const LocalScore& y = *head(b);
    if (record_less(x, y)) return false;
    if (record_less(y, x)) return true;
    return a > b;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
  for (std::size_t src = 0; src <= mem; ++src) {
    if (head(src)) heap.push(src);
  }

  std::optional<GlobalScore> current;
  while (!heap.empty()) {
    const std::size_t src = heap.top();
    heap.pop();
    const LocalScore s = *head(src);
    if (src == mem) {
      ++mem_pos;
    } else {
      readers[src].advance();
    }
    if (head(src)) heap.push(src);

    if (current && current->u == s.u && current->v == s.v) {
      current->score = kind_ == AggregatorKind::sum ? current->score + s.score : std::max(current->score, s.score);
      ++current->support;
    } else {
      if (current) out(*current);
      current = GlobalScore{s.u, s.v, s.score, 1};
    }
  }
  if (current) out(*current);

  readers.clear();
  buffer_.clear();
  std::error_code ec;
  for (const auto& run : runs_) std::filesystem::remove(run, ec);
  runs_.clear();
}

std::vector<GlobalScore> PairAggregator::finish() {
  std::vector<GlobalScore> out;
  finish([&](const GlobalScore& g) { out.push_back(g); });
  return out;
}

std::vector<GlobalScore> aggregate(std::span<const LocalScore> locals, AggregatorKind kind) {
  PairAggregator agg(kind);
  for (const auto& s : locals) agg.add(s);
  return agg.finish();
}

// ---------------------------------------------------------------------------

std::vector<Suggestion> top_k_suggestions(std::span<const GlobalScore> scores, const Graph& g, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  struct Candidate {
    NodeId user, counterpart;
    double score;
  };
  std::vector<Candidate> cands;
  cands.reserve(2 * scores.size());
  for (const auto& s : scores) {
    if (g.connected(s.u, s.v)) continue;
    cands.push_back({s.u, s.v, s.score});
    cands.push_back({s.v, s.u, s.score});
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.score != b.score) return a.score > b.score;
    return a.counterpart < b.counterpart;
  });
  std::vector<Suggestion> out;
  std::uint32_t rank = 0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    rank = (i > 0 && cands[i].user == cands[i - 1].user) ? rank + 1 : 1;
    if (rank <= k) out.push_back({cands[i].user, cands[i].counterpart, rank, cands[i].score});
  }
  return out;
}

std::vector<Suggestion> run_gefs(const Graph& g, const InEgoModel& model, AggregatorKind kind,
                                 const BuilderConfig& cfg, std::size_t k, RunStats* stats, const ScoreOptions& opt) {
  const Graph* graph = &g;
  Graph indexed;
  if (!g.has_adjacency()) {
    indexed = build_adjacency(g);
    graph = &indexed;
  }
  const auto egonets = build_egonets(*graph, cfg);
  PairAggregator agg(kind);
  const auto scoring = score_egonets(egonets, model, [&](const LocalScore& s) { agg.add(s); }, opt);
  const auto global = agg.finish();
  if (stats) *stats = {egonets.size(), scoring, global.size()};
  spdlog::info("scored {} ego-nets ({} failed), {} local scores into {} pairs", scoring.egonets, scoring.failed,
               scoring.emitted, global.size());
  return top_k_suggestions(global, *graph, k);
}

void write_local_scores(std::ostream& out, std::span<const LocalScore> scores) {
  for (const auto& s : scores) out << s.ego << ' ' << s.u << ' ' << s.v << ' ' << format_real(s.score) << '\n';
}

void write_suggestions(std::ostream& out, std::span<const Suggestion> suggestions) {
  for (const auto& s : suggestions) {
    out << s.user << ' ' << s.counterpart << ' ' << s.rank << ' ' << format_real(s.score) << '\n';
  }
}

}  // namespace egoscore
