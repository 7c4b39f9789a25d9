#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stunet/data.hpp"
#include "stunet/metrics.hpp"
#include "stunet/model.hpp"

namespace stunet {

struct TrainOptions {
  std::size_t epochs = 80;
  std::size_t batch_size = 50;
  double learning_rate = 1e-2;
  double lr_decay = 0.7;
  std::size_t lr_decay_interval = 8;
  double clip_norm = 5.0;  // 0 disables clipping
  bool scheduled_sampling = true;
  double sampling_tau = 1000.0;
  std::uint64_t seed = 0;  // window shuffling and teacher-forcing draws
};

// lr0 · decay^floor(epoch / interval), epoch counted from 0.
double learning_rate_at(const TrainOptions& options, std::size_t epoch);

struct EpochLog {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  double initial_val_loss = 0.0;
  double best_val_loss = 0.0;
  std::size_t best_epoch = 0;  // 0: the initial parameters were never beaten
  std::vector<EpochLog> log;
};

// Normalized windows plus the statistics that produced them.
struct PreparedData {
  TimeSeriesDataset raw;
  Normalizer normalizer;
  WindowConfig windows;
  std::vector<Window> train, val, test;
};

PreparedData prepare_data(const TimeSeriesDataset& raw, const WindowConfig& wc);

using EpochCallback = std::function<void(const EpochLog&)>;

// Mini-batch Adam on the training windows; the parameters with the lowest
// validation loss are restored at the end.
TrainResult train_model(STUNet& model, const PreparedData& data, const TrainOptions& options,
                        const EpochCallback& on_epoch = {});

// Mean forecast loss over windows (normalized scale), teacher forcing off.
double validation_loss(const STUNet& model, std::span<const Window> windows,
                       std::size_t batch_size);

// Forecasts for each window, [H × N × D] each, in normalized scale.
std::vector<Tensor> predict_windows(const STUNet& model, std::span<const Window> windows,
                                    std::size_t batch_size);

// Predictions and targets of a split mapped back to the original scale.
struct Forecasts {
  std::vector<Tensor> predictions;
  std::vector<Tensor> targets;
};
Forecasts forecast_split(const STUNet& model, const PreparedData& data, Split split,
                         std::size_t batch_size);
Tensor denormalize(const Normalizer& norm, const Tensor& t);

}  // namespace stunet
