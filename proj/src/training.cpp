#include "stunet/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "stunet/adam.hpp"
#include "stunet/errors.hpp"
#include "stunet/recurrent.hpp"

namespace stunet {

double learning_rate_at(const TrainOptions& options, std::size_t epoch) {
  const std::size_t interval = std::max<std::size_t>(options.lr_decay_interval, 1);
  return options.learning_rate *
         std::pow(options.lr_decay, static_cast<double>(epoch / interval));
}

PreparedData prepare_data(const TimeSeriesDataset& raw, const WindowConfig& wc) {
  PreparedData d;
  d.raw = raw;
  d.windows = wc;
  d.normalizer = Normalizer::fit(raw);
  const auto normalized = d.normalizer.apply(raw);
  d.train = make_windows(normalized, wc, Split::train);
  d.val = make_windows(normalized, wc, Split::val);
  d.test = make_windows(normalized, wc, Split::test);
  return d;
}

namespace {

std::vector<std::vector<std::size_t>> batches_of(std::size_t count, std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t b = 0; b < count; b += batch_size) {
    std::vector<std::size_t> idx(std::min(batch_size, count - b));
    std::iota(idx.begin(), idx.end(), b);
    out.push_back(std::move(idx));
  }
  return out;
}

// Splits batched [N × B × D] step tensors back into per-window [H × N × D].
void scatter_predictions(const Sequence& steps, std::vector<Tensor>& out) {
  const std::size_t H = steps.size(), n = steps[0].extent(0), b = steps[0].extent(1),
                    d = steps[0].extent(2);
  for (std::size_t k = 0; k < b; ++k) {
    std::vector<double> v(H * n * d);
    for (std::size_t h = 0; h < H; ++h) {
      const double* src = steps[h].values().data();
      for (std::size_t i = 0; i < n; ++i)
        std::copy(src + (i * b + k) * d, src + (i * b + k + 1) * d, v.begin() + (h * n + i) * d);
    }
    out.emplace_back(Shape{H, n, d}, std::move(v));
  }
}

}  // namespace

double validation_loss(const STUNet& model, std::span<const Window> windows,
                       std::size_t batch_size) {
  if (windows.empty()) throw DataError("validation split has no windows");
  NoGradGuard guard;
  double total = 0.0;
  for (const auto& idx : batches_of(windows.size(), std::max<std::size_t>(batch_size, 1))) {
    auto batch = assemble_batch(windows, idx);
    total += forecast_loss(model.forward(batch.inputs), batch.targets).item() *
             static_cast<double>(idx.size());
  }
  return total / static_cast<double>(windows.size());
}

std::vector<Tensor> predict_windows(const STUNet& model, std::span<const Window> windows,
                                    std::size_t batch_size) {
  NoGradGuard guard;
  std::vector<Tensor> out;
  out.reserve(windows.size());
  for (const auto& idx : batches_of(windows.size(), std::max<std::size_t>(batch_size, 1))) {
    auto batch = assemble_batch(windows, idx);
    scatter_predictions(model.forward(batch.inputs), out);
  }
  return out;
}

Tensor denormalize(const Normalizer& norm, const Tensor& t) {
  return Tensor(t.shape(), norm.invert(t.values()));
}

Forecasts forecast_split(const STUNet& model, const PreparedData& data, Split split,
                         std::size_t batch_size) {
  const auto& windows = split == Split::train ? data.train
                        : split == Split::val ? data.val
                                              : data.test;
  Forecasts f;
  for (const auto& p : predict_windows(model, windows, batch_size)) {
    f.predictions.push_back(denormalize(data.normalizer, p));
  }
  // Targets straight from the raw series, not through the normalizer.
  for (const auto& w : make_windows(data.raw, data.windows, split)) f.targets.push_back(w.target);
  return f;
}

TrainResult train_model(STUNet& model, const PreparedData& data, const TrainOptions& options,
                        const EpochCallback& on_epoch) {
  if (options.batch_size == 0) throw UsageError("batch_size must be positive");
  if (!(options.lr_decay > 0.0 && options.lr_decay <= 1.0)) {
    throw UsageError("lr_decay must lie in (0, 1]");
  }
  if (data.train.empty()) throw DataError("training split has no windows");

  auto params = model.parameter_tensors();
  AdamState adam;
  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  auto snapshot = [&] {
    std::vector<std::vector<double>> s;
    for (const auto& p : params) s.emplace_back(p.values().begin(), p.values().end());
    return s;
  };

  TrainResult result;
  result.initial_val_loss = validation_loss(model, data.val, options.batch_size);
  result.best_val_loss = result.initial_val_loss;
  auto best = snapshot();
  std::uint64_t iteration = 0;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    adam.hyper.learning_rate = learning_rate_at(options, epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += options.batch_size) {
      const std::span<const std::size_t> idx(order.data() + b,
                                             std::min(options.batch_size, order.size() - b));
      auto batch = assemble_batch(data.train, idx);
      ForwardOptions fw;
      if (options.scheduled_sampling) {
        fw.sampling_probability = sampling_probability(iteration, options.sampling_tau);
        fw.targets = &batch.targets;
        fw.rng = &rng;
      }
      for (auto& p : params) p.zero_grad();
      auto loss = forecast_loss(model.forward(batch.inputs, fw), batch.targets);
      loss.backward();
      loss_sum += loss.item() * static_cast<double>(idx.size());

      std::vector<std::vector<double>> grads;
      grads.reserve(params.size());
      double norm2 = 0.0;
      for (const auto& p : params) {
        auto g = p.grad();
        grads.emplace_back(p.size(), 0.0);
        if (!g.empty()) std::copy(g.begin(), g.end(), grads.back().begin());
        for (double v : grads.back()) norm2 += v * v;
      }
      const double norm = std::sqrt(norm2);
      if (options.clip_norm > 0 && norm > options.clip_norm) {
        const double f = options.clip_norm / norm;
        for (auto& g : grads)
          for (auto& v : g) v *= f;
      }
      adam_step(params, grads, adam);
      ++iteration;
    }

    EpochLog entry;
    entry.epoch = epoch + 1;
    entry.learning_rate = adam.hyper.learning_rate;
    entry.train_loss = loss_sum / static_cast<double>(order.size());
    entry.val_loss = validation_loss(model, data.val, options.batch_size);
    if (entry.val_loss < result.best_val_loss) {
      result.best_val_loss = entry.val_loss;
      result.best_epoch = entry.epoch;
      best = snapshot();
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }

  for (std::size_t i = 0; i < params.size(); ++i) {
    std::copy(best[i].begin(), best[i].end(), params[i].mutable_values().begin());
  }
  return result;
}

}  // namespace stunet
