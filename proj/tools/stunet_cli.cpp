#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "stunet/commands.hpp"
#include "stunet/errors.hpp"
#include "stunet/runtime.hpp"

using namespace stunet;

namespace {

struct Flags {
  std::string config, adj, series, ckpt, out, window, variant;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> level;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key=value config file");
  cmd->add_option("--adj", f.adj, "adjacency file");
  cmd->add_option("--series", f.series, "series CSV");
  cmd->add_option("--ckpt", f.ckpt, "checkpoint path");
  cmd->add_option("--out", f.out, "output directory (predict/partition: output file)");
  cmd->add_option("--seed", f.seed, "model, shuffling and synthesis seed");
  cmd->add_option("--variant", f.variant, "GCGRU, T-UNet, S-UNet or ST-UNet");
  cmd->add_option("--level", f.level, "pooling level p");
  cmd->add_option("--set", f.overrides, "override one config key (key=value), repeatable");
}

RunConfig build_config(const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) load_run_config(f.config, cfg);
  apply_overrides(cfg, f.overrides);
  if (!f.adj.empty()) cfg.adjacency = f.adj;
  if (!f.series.empty()) cfg.series = f.series;
  if (!f.ckpt.empty()) cfg.checkpoint = f.ckpt;
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.window.empty()) cfg.window = f.window;
  if (!f.variant.empty()) cfg.variant = parse_variant(f.variant);
  if (f.seed) cfg.model.seed = *f.seed;
  if (f.level) cfg.model.pool_level = *f.level;
  return cfg;
}

void print_report(const char* title, const MetricReport& r) {
  std::printf("%s\n", title);
  for (const auto& row : r.rows) {
    std::printf("  %-10s MAE %.4f  MAPE %.2f%%  RMSE %.4f\n", row.label.c_str(), row.values.mae,
                row.values.mape, row.values.rmse);
  }
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"ST-UNet spatio-temporal graph forecasting"};
  app.require_subcommand(1);
  Flags flags;
  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  auto* predict = app.add_subcommand("predict", "forecast from one recent window");
  auto* partition = app.add_subcommand("partition", "write the multilevel partition map");
  auto* synth = app.add_subcommand("synth", "generate a synthetic diffusion dataset");
  auto* ablation = app.add_subcommand("ablation", "compare the four variants over seeds");
  auto* upsample = app.add_subcommand("upsample-compare", "compare unpooling strategies");
  for (auto* c : {train, eval, predict, partition, synth, ablation, upsample}) add_common(c, flags);
  predict->add_option("--window", flags.window, "CSV with the J most recent rows")->required();

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const auto cfg = build_config(flags);
    if (name == "train") {
      const auto r = cmd_train(cfg);
      std::printf("best epoch %zu, validation loss %.6f (initial %.6f)\n", r.best_epoch,
                  r.best_val_loss, r.initial_val_loss);
    } else if (name == "eval") {
      const auto r = cmd_eval(cfg);
      print_report("model", r.model);
      print_report("historical average", r.ha);
    } else if (name == "predict") {
      const auto t = cmd_predict(cfg);
      std::printf("wrote %zu forecast rows\n", t.extent(0));
    } else if (name == "partition") {
      const auto counts = cmd_partition(cfg);
      for (std::size_t k = 0; k < counts.size(); ++k) std::printf("level %zu: %zu nodes\n", k, counts[k]);
    } else if (name == "synth") {
      cmd_synth(cfg);
    } else if (name == "ablation") {
      cmd_ablation(cfg);
    } else if (name == "upsample-compare") {
      cmd_upsample_compare(cfg);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "stunet %s: %s\n", name.c_str(), e.what());
    return 1;
  }
  return 0;
}
