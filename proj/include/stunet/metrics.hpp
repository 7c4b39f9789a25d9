#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stunet/data.hpp"
#include "stunet/tensor.hpp"

namespace stunet {

double mae(std::span<const double> pred, std::span<const double> target);
double rmse(std::span<const double> pred, std::span<const double> target);
double mse(std::span<const double> pred, std::span<const double> target);

struct MapeResult {
  double percent = 0.0;
  std::size_t used = 0;
  std::size_t masked = 0;  // entries with |target| below the threshold
};

inline constexpr double kDefaultMapeThreshold = 1e-3;

// MetricError when every entry is masked.
MapeResult mape(std::span<const double> pred, std::span<const double> target,
                double mask_threshold = kDefaultMapeThreshold);

struct MetricValues {
  double mae = 0.0;
  double rmse = 0.0;
  double mse = 0.0;
  double mape = 0.0;  // percent; NaN when every target was masked
  std::size_t count = 0;
  std::size_t mape_masked = 0;
};

MetricValues compute_metrics(std::span<const double> pred, std::span<const double> target,
                             double mask_threshold = kDefaultMapeThreshold);

struct HorizonRow {
  std::size_t step = 0;  // 1-based horizon step
  std::string label;     // "15 min" with an interval label, else "step 3"
  MetricValues values;
};

struct MetricReport {
  std::vector<HorizonRow> rows;
};

std::string horizon_label(std::size_t step, double interval_minutes);

// predictions / targets: one [H × N × D] tensor per window, original scale.
// `horizons` lists 1-based steps; empty means every step.
MetricReport evaluate_forecasts(std::span<const Tensor> predictions, std::span<const Tensor> targets,
                                const std::vector<std::size_t>& horizons, double interval_minutes,
                                double mask_threshold = kDefaultMapeThreshold);

struct Provenance {
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::string commit;
};

// Commit identifier baked in at build time.
std::string build_commit();
std::string hash_text(const std::string& text);

std::string format_report_text(const MetricReport& report, const Provenance& prov);
std::string format_report_csv(const MetricReport& report, const Provenance& prov);

// Steps per day for labeled data, 0 (window-mean fallback) otherwise.
std::size_t default_ha_period(const TimeSeriesDataset& ds);

// Historical average for each window of `split` (raw scale). With a period,
// each horizon step predicts the training-split mean at the same phase per
// node and feature; with period 0 it repeats the input-window mean.
std::vector<Tensor> ha_baseline(const TimeSeriesDataset& ds, const WindowConfig& wc, Split split,
                                std::size_t period);

}  // namespace stunet
