#include "stunet/commands.hpp"

#include <spdlog/spdlog.h>

#include <cstdio>
#include <fstream>

#include "stunet/errors.hpp"
#include "text_util.hpp"

namespace stunet {

namespace {

namespace fs = std::filesystem;

fs::path out_dir(const RunConfig& cfg) {
  const fs::path dir = cfg.out.empty() ? fs::path(".") : cfg.out;
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError(path.string() + ": cannot open for writing");
  f << text;
  if (!f) throw DataError(path.string() + ": write failed");
}

std::string file_digest(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(path.string() + ": cannot open");
  const std::string content{std::istreambuf_iterator<char>(f), {}};
  return hash_text(content);
}

const fs::path& require(const fs::path& p, const char* flag) {
  if (p.empty()) throw UsageError(std::string("missing ") + flag);
  return p;
}

fs::path checkpoint_path(const RunConfig& cfg) {
  return cfg.checkpoint.empty() ? out_dir(cfg) / "model.ckpt" : cfg.checkpoint;
}

std::string join_doubles(std::span<const double> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += detail::format_double(v[i]);
  }
  return s;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (auto part : detail::split(text, ',')) out.push_back(detail::parse_double(key, part));
  return out;
}

Graph load_graph(const RunConfig& cfg) {
  return load_adjacency(require(cfg.adjacency, "--adj"), cfg.adjacency_options);
}

struct LoadedModel {
  Checkpoint ckpt;
  STUNet model;
  Normalizer normalizer;
};

LoadedModel load_model(const RunConfig& cfg, const Graph& graph) {
  auto ckpt = load_checkpoint(require(cfg.checkpoint, "--ckpt"));
  const auto* mean = ckpt.find("normalizer_mean");
  const auto* sd = ckpt.find("normalizer_std");
  if (!mean || !sd) throw LoadError(cfg.checkpoint.string() + ": no normalizer statistics");
  STUNet model(ckpt.config, graph);
  model.load_parameters(ckpt.parameters);
  Normalizer norm(parse_doubles("normalizer_mean", *mean), parse_doubles("normalizer_std", *sd));
  return {std::move(ckpt), std::move(model), std::move(norm)};
}

PreparedData prepare_with(const TimeSeriesDataset& raw, const WindowConfig& wc,
                          const Normalizer& norm) {
  PreparedData d;
  d.raw = raw;
  d.windows = wc;
  d.normalizer = norm;
  const auto normalized = norm.apply(raw);
  d.train = make_windows(normalized, wc, Split::train);
  d.val = make_windows(normalized, wc, Split::val);
  d.test = make_windows(normalized, wc, Split::test);
  return d;
}

Provenance provenance_with(const RunConfig& cfg, std::vector<std::uint64_t> seeds,
                           const std::string& extra) {
  std::string text = cfg.canonical_text() + extra;
  if (!cfg.adjacency.empty()) text += "adjacency_digest=" + file_digest(cfg.adjacency) + "\n";
  if (!cfg.series.empty()) text += "series_digest=" + file_digest(cfg.series) + "\n";
  return {hash_text(text), std::move(seeds), build_commit()};
}

ExperimentOptions experiment_options(const RunConfig& cfg) {
  ExperimentOptions o;
  o.train = cfg.effective_train();
  o.seeds = cfg.seeds;
  o.horizons = cfg.horizons;
  o.interval_minutes = cfg.interval_minutes;
  o.eval_batch = cfg.eval_batch;
  o.threads = cfg.threads;
  return o;
}

}  // namespace

TimeSeriesDataset load_dataset(const RunConfig& cfg) {
  auto ds = load_series(require(cfg.series, "--series"), load_graph(cfg), cfg.features);
  ds.train_fraction = cfg.train_fraction;
  ds.val_fraction = cfg.val_fraction;
  ds.interval_minutes = cfg.interval_minutes;
  return ds;
}

Provenance make_provenance(const RunConfig& cfg, std::vector<std::uint64_t> seeds) {
  return provenance_with(cfg, std::move(seeds), "");
}

TrainResult cmd_train(const RunConfig& cfg) {
  cfg.validate();
  const auto model_cfg = cfg.effective_model();
  const auto data = prepare_data(load_dataset(cfg), {model_cfg.input_length, model_cfg.horizon});
  STUNet model(model_cfg, data.raw.graph);

  std::string log = "epoch,learning_rate,train_loss,val_loss\n";
  const auto result = train_model(model, data, cfg.effective_train(), [&](const EpochLog& e) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu,%.6g,%.10g,%.10g\n", e.epoch, e.learning_rate,
                  e.train_loss, e.val_loss);
    log += buf;
    spdlog::info("epoch {:>3}  lr {:.3g}  train {:.6f}  val {:.6f}", e.epoch, e.learning_rate,
                 e.train_loss, e.val_loss);
  });

  const auto dir = out_dir(cfg);
  write_text(dir / "train_log.csv", log);
  save_checkpoint(checkpoint_path(cfg), model,
                  {{"variant", to_string(cfg.variant)},
                   {"normalizer_mean", join_doubles(data.normalizer.mean())},
                   {"normalizer_std", join_doubles(data.normalizer.stddev())},
                   {"initial_val_loss", detail::format_double(result.initial_val_loss)},
                   {"best_val_loss", detail::format_double(result.best_val_loss)},
                   {"best_epoch", std::to_string(result.best_epoch)}});
  return result;
}

EvalOutput cmd_eval(const RunConfig& cfg) {
  cfg.validate();
  const auto raw = load_dataset(cfg);
  auto loaded = load_model(cfg, raw.graph);
  const auto& mc = loaded.model.config();
  if (mc.input_dim != raw.features) {
    throw LoadError("checkpoint expects " + std::to_string(mc.input_dim) +
                    " features, series has " + std::to_string(raw.features));
  }
  const WindowConfig wc{mc.input_length, mc.horizon};
  const auto data = prepare_with(raw, wc, loaded.normalizer);
  const auto f = forecast_split(loaded.model, data, Split::test, cfg.eval_batch);

  EvalOutput out;
  out.model = evaluate_forecasts(f.predictions, f.targets, cfg.horizons, cfg.interval_minutes);
  const auto period = cfg.ha_period ? *cfg.ha_period : default_ha_period(raw);
  const auto ha = ha_baseline(raw, wc, Split::test, period);
  out.ha = evaluate_forecasts(ha, f.targets, cfg.horizons, cfg.interval_minutes);
  out.provenance = provenance_with(cfg, {mc.seed},
                                   "checkpoint_digest=" + file_digest(cfg.checkpoint) + "\n");

  const auto dir = out_dir(cfg);
  write_text(dir / "report.txt", format_report_text(out.model, out.provenance));
  write_text(dir / "report.csv", format_report_csv(out.model, out.provenance));
  auto ha_prov = out.provenance;
  ha_prov.config_hash = hash_text(out.provenance.config_hash + "ha_period=" +
                                  std::to_string(period));
  write_text(dir / "ha_report.txt", format_report_text(out.ha, ha_prov));
  write_text(dir / "ha_report.csv", format_report_csv(out.ha, ha_prov));
  return out;
}

Tensor cmd_predict(const RunConfig& cfg) {
  const auto graph = load_graph(cfg);
  auto loaded = load_model(cfg, graph);
  const auto& mc = loaded.model.config();
  const auto recent = load_series(require(cfg.window, "--window"), graph, mc.input_dim);
  if (recent.steps != mc.input_length) {
    throw UsageError(cfg.window.string() + ": window has " + std::to_string(recent.steps) +
                     " rows, the model expects J=" + std::to_string(mc.input_length));
  }
  Window w;
  w.input = Tensor(Shape{recent.steps, recent.nodes, recent.features},
                   loaded.normalizer.apply(recent.values));
  w.target = Tensor(Shape{mc.horizon, recent.nodes, recent.features});
  const auto pred = denormalize(loaded.normalizer,
                                predict_windows(loaded.model, std::span(&w, 1), 1).front());

  TimeSeriesDataset out;
  out.steps = mc.horizon;
  out.nodes = recent.nodes;
  out.features = recent.features;
  out.values.assign(pred.values().begin(), pred.values().end());
  const fs::path path = cfg.out.empty() ? fs::path("forecast.csv") : cfg.out;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_series(path, out);
  return pred;
}

std::vector<std::size_t> cmd_partition(const RunConfig& cfg) {
  const auto graph = load_graph(cfg);
  const auto levels = cfg.model.pool_level;
  if (levels == 0) throw UsageError("--level must be at least 1");
  const auto pm = multilevel_partition(graph, static_cast<int>(levels));
  const fs::path path = cfg.out.empty() ? fs::path("partition.txt") : cfg.out;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text(path, pm.to_text());
  std::vector<std::size_t> counts;
  for (std::size_t k = 0; k <= pm.num_levels(); ++k) counts.push_back(pm.node_count(k));
  return counts;
}

void cmd_synth(const RunConfig& cfg) {
  const auto graph = knn_grid_graph(cfg.synth_rows, cfg.synth_cols);
  auto options = cfg.synth;
  options.seed = cfg.model.seed;
  const auto ds = synth_diffusion(graph, options);
  const auto dir = out_dir(cfg);
  write_dense_adjacency(dir / "adj.csv", graph);
  write_series(dir / "series.csv", ds);
  std::string manifest = "# synthetic diffusion dataset; pass as --config to regenerate\n";
  for (const auto& [k, v] : cfg.to_pairs()) {
    if (k.rfind("synth_", 0) == 0 || k == "seed") manifest += k + "=" + v + "\n";
  }
  write_text(dir / "manifest.txt", manifest);
}

ExperimentTable cmd_ablation(const RunConfig& cfg) {
  cfg.validate();
  const auto data = prepare_data(load_dataset(cfg), {cfg.model.input_length, cfg.model.horizon});
  auto table = run_ablation(cfg.model, data, experiment_options(cfg));
  const auto prov = make_provenance(cfg, cfg.seeds);
  const std::vector<Metric> metrics{Metric::mae, Metric::mape, Metric::rmse};
  const auto dir = out_dir(cfg);
  write_text(dir / "ablation.txt", format_table_text(table, metrics, prov));
  write_text(dir / "ablation.csv", format_table_csv(table, metrics, prov));
  return table;
}

ExperimentTable cmd_upsample_compare(const RunConfig& cfg) {
  cfg.validate();
  const auto data = prepare_data(load_dataset(cfg), {cfg.model.input_length, cfg.model.horizon});
  auto table = run_upsampling_comparison(cfg.effective_model(), data, experiment_options(cfg));
  const auto prov = make_provenance(cfg, cfg.seeds);
  const std::vector<Metric> metrics{Metric::mse, Metric::mae, Metric::rmse};
  const auto dir = out_dir(cfg);
  write_text(dir / "upsample.txt", format_table_text(table, metrics, prov));
  write_text(dir / "upsample.csv", format_table_csv(table, metrics, prov));
  return table;
}

}  // namespace stunet
