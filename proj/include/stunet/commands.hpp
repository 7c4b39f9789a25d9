#pragma once

#include <filesystem>
#include <string>

#include "stunet/config.hpp"
#include "stunet/experiments.hpp"
#include "stunet/metrics.hpp"

namespace stunet {

// Each command reads the paths of `cfg` and writes its files under cfg.out
// (a directory, except for predict and partition where it names the file).

// Writes the best-on-validation checkpoint to cfg.checkpoint (default
// out/model.ckpt) and out/train_log.csv.
TrainResult cmd_train(const RunConfig& cfg);

struct EvalOutput {
  MetricReport model;
  MetricReport ha;
  Provenance provenance;
};

// out/report.txt, out/report.csv and the historical-average baseline in
// out/ha_report.txt, out/ha_report.csv.
EvalOutput cmd_eval(const RunConfig& cfg);

// Forecast for the J-row series in cfg.window, written as H rows of N·D
// columns in the original scale.
Tensor cmd_predict(const RunConfig& cfg);

// Partition map text for cfg.model.pool_level levels; returns node counts
// per level, base first.
std::vector<std::size_t> cmd_partition(const RunConfig& cfg);

// out/adj.csv, out/series.csv and out/manifest.txt. The manifest is itself a
// config file that regenerates the same files.
void cmd_synth(const RunConfig& cfg);

ExperimentTable cmd_ablation(const RunConfig& cfg);
ExperimentTable cmd_upsample_compare(const RunConfig& cfg);

// Config hash plus digests of the adjacency and series file contents.
Provenance make_provenance(const RunConfig& cfg, std::vector<std::uint64_t> seeds);

// Dataset described by cfg (graph, series, split fractions, interval).
TimeSeriesDataset load_dataset(const RunConfig& cfg);

}  // namespace stunet
