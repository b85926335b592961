#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "egoscore/checkpoint.hpp"
#include "egoscore/egonet_builder.hpp"
#include "egoscore/egonet_io.hpp"
#include "egoscore/eval.hpp"
#include "egoscore/models.hpp"
#include "egoscore/pipeline.hpp"
#include "egoscore/synthetic.hpp"
#include "egoscore/train.hpp"

namespace {

using namespace egoscore;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void add_builder_options(CLI::App* cmd, BuilderConfig& cfg, bool& no_pendants, bool& directed_closure) {
  cmd->add_option("--cap", cfg.cap, "max nodes per ego-net, ego included")->capture_default_str();
  cmd->add_option("--bloom-bpe", cfg.bloom_bits_per_edge, "bloom filter bits per closing edge")->capture_default_str();
  cmd->add_option("--bloom-hashes", cfg.bloom_hashes, "bloom filter hash count")->capture_default_str();
  cmd->add_option("--partitions", cfg.partitions, "local map/reduce partitions")->capture_default_str();
  cmd->add_flag("--no-pendants", no_pendants, "drop members with no edge to another member");
  cmd->add_flag("--directed-closure", directed_closure, "require the closing edge ego -> v");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"egoscore: ego-net friend suggestion pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  int threads = 0;
  std::string log_level = "info";
  auto* seed_opt = app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")->capture_default_str();

  // build-egonets
  BuilderConfig build_cfg;
  bool no_pendants = false, directed_closure = false;
  std::string graph_path, out_path;
  auto* build_cmd = app.add_subcommand("build-egonets", "construct ego-nets from a typed edge list");
  build_cmd->add_option("--graph", graph_path, "edge list: src dst etype attr")->required();
  build_cmd->add_option("--out", out_path, "ego-net file")->required();
  add_builder_options(build_cmd, build_cfg, no_pendants, directed_closure);

  // train
  std::string data_path, valid_path, config_path, ckpt_path;
  auto* train_cmd = app.add_subcommand("train", "train a WalkGNN in-ego model");
  train_cmd->add_option("--data", data_path, "training ego-nets")->required();
  train_cmd->add_option("--valid", valid_path, "validation ego-nets")->required();
  train_cmd->add_option("--config", config_path, "JSON training config");
  train_cmd->add_option("--out", ckpt_path, "checkpoint to write")->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "score ego-nets with a checkpoint");
  predict_cmd->add_option("--data", data_path, "ego-nets")->required();
  predict_cmd->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  predict_cmd->add_option("--out", out_path, "scores file: ego u v score")->required();

  // run
  std::string model_spec = "aa", agg_name = "sum";
  std::size_t k = 10;
  auto* run_cmd = app.add_subcommand("run", "end-to-end friend suggestions for a graph");
  run_cmd->add_option("--graph", graph_path, "edge list")->required();
  run_cmd->add_option("--model", model_spec, "aa|aa-size|cn|waa|fs|<checkpoint>")->capture_default_str();
  run_cmd->add_option("--agg", agg_name, "sum|max")->capture_default_str();
  run_cmd->add_option("--k", k, "suggestions per user")->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_path, "suggestions file: user counterpart rank score")->required();
  add_builder_options(run_cmd, build_cfg, no_pendants, directed_closure);

  // evaluate
  std::size_t eval_k = 5, bootstrap = 1000;
  std::string report_path;
  auto* eval_cmd = app.add_subcommand("evaluate", "NDCG@k with a bootstrap confidence interval");
  eval_cmd->add_option("--data", data_path, "ego-nets with ground truth")->required();
  eval_cmd->add_option("--model", model_spec, "aa|aa-size|cn|waa|fs|<checkpoint>")->required();
  eval_cmd->add_option("--k", eval_k, "cutoff")->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--bootstrap", bootstrap, "bootstrap resamples")->capture_default_str();
  eval_cmd->add_option("--report", report_path, "report file");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a planted-rule ego-net dataset");
  synth_cmd->add_option("--config", config_path, "JSON synthetic config");
  synth_cmd->add_option("--out", out_path, "ego-net file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    spdlog::set_level(spdlog::level::from_str(log_level));
    spdlog::set_default_logger(spdlog::default_logger()->clone("egoscore"));
    if (threads > 0) omp_set_num_threads(threads);
    build_cfg.include_pendants = !no_pendants;
    build_cfg.undirected_closure = !directed_closure;

    if (*build_cmd) {
      const auto g = load_graph(graph_path);
      auto out = open_out(out_path);
      const auto count = build_all_egonets(g, build_cfg, out);
      spdlog::info("wrote {} ego-nets to {}", count, out_path);
    } else if (*train_cmd) {
      auto setup = config_path.empty() ? TrainingSetup{} : load_training_config(config_path);
      if (seed_opt->count()) {
        setup.model.seed = seed;
        setup.train.seed = seed;
      }
      const auto train_set = load_egonets(data_path);
      const auto valid_set = load_egonets(valid_path);
      if (!train_set.empty()) setup.model.num_types = train_set.front().num_types;
      const WalkGnn net(setup.model);
      auto result = train(net, net.init_params(), train_set, valid_set, setup.train);
      save_checkpoint(ckpt_path, setup.model, result.params);
      spdlog::info("best validation ndcg@{} {:.5f} at epoch {}; checkpoint {}", setup.train.eval_k,
                   result.best_valid_ndcg, result.best_epoch, ckpt_path);
    } else if (*predict_cmd) {
      auto [cfg, params] = load_checkpoint(ckpt_path);
      const WalkGnnModel model(cfg, std::move(params));
      const auto egonets = load_egonets(data_path);
      auto out = open_out(out_path);
      const auto stats = score_egonets(egonets, model, [&](const LocalScore& s) { write_local_scores(out, {&s, 1}); });
      spdlog::info("scored {} ego-nets ({} failed), {} pairs", stats.egonets, stats.failed, stats.emitted);
      if (stats.failed) return 3;
    } else if (*run_cmd) {
      const auto g = load_graph(graph_path);
      const auto model = make_model(model_spec);
      const auto suggestions = run_gefs(g, *model, parse_aggregator(agg_name), build_cfg, k);
      auto out = open_out(out_path);
      write_suggestions(out, suggestions);
      spdlog::info("wrote {} suggestions to {}", suggestions.size(), out_path);
    } else if (*eval_cmd) {
      const auto model = make_model(model_spec);
      const auto egonets = load_egonets(data_path);
      const auto report = evaluate(*model, egonets, eval_k, bootstrap, seed);
      write_report(std::cout, report);
      if (!report_path.empty()) {
        auto out = open_out(report_path);
        write_report(out, report);
      }
    } else if (*synth_cmd) {
      auto cfg = config_path.empty() ? SyntheticConfig{} : load_synthetic_config(config_path);
      if (seed_opt->count()) cfg.seed = seed;
      const auto data = generate_synthetic(cfg);
      save_egonets(out_path, data.egonets);
      spdlog::info("wrote {} synthetic ego-nets to {}", data.egonets.size(), out_path);
    }
  } catch (const std::exception& ex) {
    spdlog::error("{}", ex.what());
    return 1;
  }
  return 0;
}
