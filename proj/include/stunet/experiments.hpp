#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stunet/metrics.hpp"
#include "stunet/model.hpp"
#include "stunet/training.hpp"

namespace stunet {

struct ExperimentOptions {
  TrainOptions train;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<std::size_t> horizons;  // empty: every step
  double interval_minutes = 0.0;
  std::size_t eval_batch = 64;
  // Worker threads for independent cells; 0 reads STUNET_THREADS, default 1.
  std::size_t threads = 0;
};

// One trained (row, seed) combination.
struct ExperimentCell {
  std::string row;
  std::uint64_t seed = 0;
  STUNetConfig config;
  bool finished = false;   // training ran to completion
  bool converged = false;  // finished and validation loss improved
  std::string failure;
  MetricReport report;
};

struct ExperimentTable {
  std::vector<std::string> rows;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> horizons;  // 1-based steps present in each report
  std::vector<std::string> labels;
  std::vector<ExperimentCell> cells;  // row-major: rows × seeds
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
  std::size_t n = 0;
};

Summary summarize(const std::vector<double>& values);

enum class Metric { mae, mape, rmse, mse };
std::string to_string(Metric m);

// Summary over the finished cells of `row` at horizon column `column`.
Summary summarize_cell(const ExperimentTable& table, const std::string& row, std::size_t column,
                       Metric metric);

std::size_t resolve_threads(std::size_t requested);

// The four variants of `base`, each trained once per seed.
ExperimentTable run_ablation(const STUNetConfig& base, const PreparedData& data,
                             const ExperimentOptions& options);

// direct_copy, ordered_deconv and weighted_deconv on otherwise identical models.
ExperimentTable run_upsampling_comparison(const STUNetConfig& base, const PreparedData& data,
                                          const ExperimentOptions& options);

// "mean±std" columns per horizon for each metric, plus per-row failure notes.
std::string format_table_text(const ExperimentTable& table, const std::vector<Metric>& metrics,
                              const Provenance& prov);
std::string format_table_csv(const ExperimentTable& table, const std::vector<Metric>& metrics,
                             const Provenance& prov);

}  // namespace stunet
