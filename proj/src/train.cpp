#include "egoscore/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "egoscore/eval.hpp"
#include "json.hpp"

namespace egoscore {

void adam_step(ParamStore& params, const AdamConfig& cfg) {
  ++params.step;
  const double t = static_cast<double>(params.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& p : params.params()) {
    double* w = p.value.ptr();
    const double* g = p.grad.ptr();
    double* m = p.first_moment.ptr();
    double* v = p.second_moment.ptr();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      w[i] -= cfg.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
    }
  }
}

double loss_and_grad(const WalkGnn& net, const ParamStore& params, ParamStore& grads, const EgoNet& e, int negatives,
                     std::mt19937_64& rng) {
  const auto pairs = sample_rank_pairs(e, negatives, rng);
  Tape tape;
  const auto scores = net.forward(tape, e, params, &grads);
  const auto loss = ad::pairwise_logistic(tape, scores, e.size(), pairs);
  const double value = tape.value(loss)[0];
  if (std::isfinite(value)) tape.backward(loss);
  return value;
}

double mean_ndcg(const WalkGnn& net, const ParamStore& params, std::span<const EgoNet> egonets, std::size_t k) {
  std::vector<double> values(egonets.size(), -1.0);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(egonets.size()); ++i) {
    const auto& e = egonets[static_cast<std::size_t>(i)];
    if (!e.ground_truth.empty()) values[static_cast<std::size_t>(i)] = ndcg_at_k(net.score(e, params), e, k);
  }
  double total = 0.0;
  std::size_t count = 0;
  for (double v : values) {
    if (v < 0.0) continue;
    total += v;
    ++count;
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

namespace {

bool usable(const EgoNet& e) {
  if (e.ground_truth.empty()) return false;
  const auto mask = candidate_mask(e);
  const auto open = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{0}));
  // open counts both directions of every unmasked pair
  return open / 2 > e.ground_truth.size();
}

}  // namespace

TrainResult train(const WalkGnn& net, ParamStore init, std::span<const EgoNet> train_set,
                  std::span<const EgoNet> valid_set, const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  net.check_params(init);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    if (usable(train_set[i])) order.push_back(i);
  }
  TrainResult result;
  result.skipped = train_set.size() - order.size();
  if (result.skipped) spdlog::warn("skipping {} training ego-nets without usable pairs", result.skipped);

  ParamStore params = std::move(init);
  params.zero_grad();
  result.params = params;
  result.best_valid_ndcg = valid_set.empty() ? 0.0 : mean_ndcg(net, params, valid_set, cfg.eval_k);

  std::vector<ParamStore> item_grads(std::min(cfg.batch_size, std::max<std::size_t>(order.size(), 1)), params);
  std::vector<double> item_loss(item_grads.size());
  std::mt19937_64 shuffle_rng(cfg.seed);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  for (int epoch = 1; epoch <= cfg.epochs && !result.time_limited; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochStats stats;
    stats.epoch = epoch;
    double loss_total = 0.0;
    std::size_t loss_count = 0;

    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      if (cfg.max_seconds > 0.0 && elapsed() > cfg.max_seconds) {
        result.time_limited = true;
        break;
      }
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const auto batch = static_cast<long long>(end - begin);
#pragma omp parallel for schedule(dynamic)
      for (long long j = 0; j < batch; ++j) {
        const std::size_t pos = begin + static_cast<std::size_t>(j);
        ParamStore& grads = item_grads[static_cast<std::size_t>(j)];
        grads.zero_grad();
        // per-item stream: negatives do not depend on scheduling
        std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(pos)};
        std::mt19937_64 rng(seq);
        item_loss[static_cast<std::size_t>(j)] = loss_and_grad(net, params, grads, train_set[order[pos]], cfg.negatives, rng);
      }
      params.zero_grad();
      for (long long j = 0; j < batch; ++j) {
        const double loss = item_loss[static_cast<std::size_t>(j)];
        if (!std::isfinite(loss)) {
          std::ostringstream msg;
          msg << "training diverged: loss " << loss << " on ego " << train_set[order[begin + static_cast<std::size_t>(j)]].ego
              << " (epoch " << epoch << ", step " << params.step + 1 << ")";
          throw TrainingDiverged(msg.str());
        }
        loss_total += loss;
        ++loss_count;
        params.accumulate_grads(item_grads[static_cast<std::size_t>(j)]);
      }
      if (batch > 1) {
        const double inv = 1.0 / static_cast<double>(batch);
        for (auto& p : params.params()) {
          for (double& g : p.grad.data()) g *= inv;
        }
      }
      adam_step(params, cfg.adam);
      ++stats.steps;
    }

    stats.mean_loss = loss_count ? loss_total / static_cast<double>(loss_count) : 0.0;
    stats.valid_ndcg = valid_set.empty() ? 0.0 : mean_ndcg(net, params, valid_set, cfg.eval_k);
    stats.seconds = elapsed();
    result.history.push_back(stats);
    spdlog::info("epoch {} steps {} loss {:.5f} valid ndcg@{} {:.5f} ({:.1f}s)", epoch, stats.steps, stats.mean_loss,
                 cfg.eval_k, stats.valid_ndcg, stats.seconds);
    if (cfg.on_epoch) cfg.on_epoch(stats);
    // without a validation set the latest parameters win
    if (valid_set.empty() || stats.valid_ndcg > result.best_valid_ndcg) {
      result.best_valid_ndcg = stats.valid_ndcg;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  result.params.zero_grad();
  return result;
}

TrainingSetup parse_training_config(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("training config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "model" && key != "train") throw std::invalid_argument("unknown training config section '" + key + "'");
  }
  TrainingSetup setup;
  std::set<std::string> known;
  auto read = [&known](const nlohmann::json& section, const char* key, auto& field) {
    known.insert(key);
    if (section.contains(key)) field = section.at(key).get<std::decay_t<decltype(field)>>();
  };
  auto reject_unknown = [&known](const nlohmann::json& section, const char* name) {
    for (const auto& item : section.items()) {
      if (!known.count(item.key())) {
        throw std::invalid_argument(std::string("unknown key '") + item.key() + "' in training config section " + name);
      }
    }
    known.clear();
  };
  if (j.contains("model")) {
    const auto& m = j.at("model");
    auto& c = setup.model;
    read(m, "layers", c.layers);
    read(m, "hidden", c.hidden);
    read(m, "mlp_depth", c.mlp_depth);
    read(m, "mlp_hidden", c.mlp_hidden);
    read(m, "num_types", c.num_types);
    read(m, "directed_concat", c.directed_concat);
    read(m, "residual", c.residual);
    read(m, "node_features", c.node_features);
    read(m, "edge_attrs", c.edge_attrs);
    read(m, "zero_init_layer_output", c.zero_init_layer_output);
    read(m, "seed", c.seed);
    reject_unknown(m, "model");
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    auto& c = setup.train;
    read(t, "epochs", c.epochs);
    read(t, "lr", c.adam.lr);
    read(t, "beta1", c.adam.beta1);
    read(t, "beta2", c.adam.beta2);
    read(t, "eps", c.adam.eps);
    read(t, "negatives", c.negatives);
    read(t, "batch_size", c.batch_size);
    read(t, "eval_k", c.eval_k);
    read(t, "seed", c.seed);
    read(t, "max_seconds", c.max_seconds);
    reject_unknown(t, "train");
  }
  validate(setup.model);
  if (setup.train.epochs < 0 || setup.train.negatives < 1 || setup.train.batch_size < 1 || setup.train.eval_k < 1) {
    throw std::invalid_argument("training config: epochs >= 0, negatives >= 1, batch_size >= 1 and eval_k >= 1 required");
  }
  return setup;
}

TrainingSetup load_training_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open training config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_training_config(text.str());
}

}  // namespace egoscore
