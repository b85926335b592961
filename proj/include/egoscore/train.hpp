#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "egoscore/autodiff.hpp"
#include "egoscore/graph.hpp"
#include "egoscore/walkgnn.hpp"

namespace egoscore {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update from the gradients currently in `params`.
void adam_step(ParamStore& params, const AdamConfig& cfg);

struct EpochStats {
  int epoch = 0;
  std::size_t steps = 0;
  double mean_loss = 0.0;
  double valid_ndcg = 0.0;
  double seconds = 0.0;
};

struct TrainConfig {
  int epochs = 20;
  AdamConfig adam;
  int negatives = 16;
  /// Ego-nets per optimizer step; gradients are averaged in data order.
  std::size_t batch_size = 1;
  std::size_t eval_k = 5;
  std::uint64_t seed = 0;
  /// Wall-clock budget; 0 means unlimited. Checked between steps.
  double max_seconds = 0.0;
  std::function<void(const EpochStats&)> on_epoch;
};

struct TrainResult {
  ParamStore params;  // best-validation parameters
  double best_valid_ndcg = 0.0;
  int best_epoch = 0;
  std::vector<EpochStats> history;
  std::size_t skipped = 0;  // ego-nets without usable pairs, per epoch
  bool time_limited = false;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loss and gradients of one ego-net; gradients are added into `grads`.
double loss_and_grad(const WalkGnn& net, const ParamStore& params, ParamStore& grads, const EgoNet& e, int negatives,
                     std::mt19937_64& rng);

/// Mean NDCG@k of the network over ego-nets with ground truth.
double mean_ndcg(const WalkGnn& net, const ParamStore& params, std::span<const EgoNet> egonets, std::size_t k = 5);

/// Epochs of shuffled mini-batch Adam steps with best-validation checkpointing.
/// Deterministic given cfg.seed. Throws TrainingDiverged on a non-finite loss.
TrainResult train(const WalkGnn& net, ParamStore init, std::span<const EgoNet> train_set,
                  std::span<const EgoNet> valid_set, const TrainConfig& cfg);

struct TrainingSetup {
  WalkGnnConfig model;
  TrainConfig train;
};

/// JSON of the form {"model": {...}, "train": {...}}; absent keys keep their defaults.
/// Model keys mirror WalkGnnConfig; train keys are epochs, lr, beta1, beta2, eps,
/// negatives, batch_size, eval_k, seed, max_seconds.
TrainingSetup parse_training_config(const std::string& json_text);
TrainingSetup load_training_config(const std::filesystem::path& path);

}  // namespace egoscore
