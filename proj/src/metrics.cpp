#include "stunet/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "stunet/adam.hpp"
#include "stunet/errors.hpp"

#ifndef STUNET_COMMIT
#define STUNET_COMMIT "unknown"
#endif

namespace stunet {

namespace {

void check_sizes(std::span<const double> pred, std::span<const double> target, const char* what) {
  if (pred.size() != target.size()) {
    throw DimensionError(std::string(what) + ": prediction has " + std::to_string(pred.size()) +
                         " entries, target has " + std::to_string(target.size()));
  }
  if (pred.empty()) throw MetricError(std::string(what) + ": no entries");
}

std::string printf_string(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string provenance_lines(const Provenance& prov, const char* prefix) {
  std::string seeds;
  for (std::size_t i = 0; i < prov.seeds.size(); ++i) {
    if (i) seeds += ' ';
    seeds += std::to_string(prov.seeds[i]);
  }
  return std::string(prefix) + "config_hash: " + prov.config_hash + "\n" + prefix +
         "seeds: " + seeds + "\n" + prefix + "commit: " + prov.commit + "\n";
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> target) {
  check_sizes(pred, target, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
  return s / static_cast<double>(pred.size());
}

double mse(std::span<const double> pred, std::span<const double> target) {
  check_sizes(pred, target, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    s += e * e;
  }
  return s / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> target) {
  return std::sqrt(mse(pred, target));
}

MapeResult mape(std::span<const double> pred, std::span<const double> target,
                double mask_threshold) {
  check_sizes(pred, target, "mape");
  MapeResult r;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (std::abs(target[i]) < mask_threshold) {
      ++r.masked;
      continue;
    }
    s += std::abs((pred[i] - target[i]) / target[i]);
    ++r.used;
  }
  if (r.used == 0) throw MetricError("mape: every target is below the mask threshold");
  r.percent = 100.0 * s / static_cast<double>(r.used);
  return r;
}

MetricValues compute_metrics(std::span<const double> pred, std::span<const double> target,
                             double mask_threshold) {
  MetricValues v;
  v.mae = mae(pred, target);
  v.mse = mse(pred, target);
  v.rmse = std::sqrt(v.mse);
  v.count = pred.size();
  try {
    const auto m = mape(pred, target, mask_threshold);
    v.mape = m.percent;
    v.mape_masked = m.masked;
  } catch (const MetricError&) {
    v.mape = std::numeric_limits<double>::quiet_NaN();
    v.mape_masked = pred.size();
  }
  return v;
}

std::string horizon_label(std::size_t step, double interval_minutes) {
  if (interval_minutes > 0) return printf_string("%g min", interval_minutes * step);
  return "step " + std::to_string(step);
}

MetricReport evaluate_forecasts(std::span<const Tensor> predictions, std::span<const Tensor> targets,
                                const std::vector<std::size_t>& horizons, double interval_minutes,
                                double mask_threshold) {
  if (predictions.size() != targets.size() || predictions.empty()) {
    throw DimensionError("evaluate: " + std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(targets.size()) + " targets");
  }
  const std::size_t H = targets[0].extent(0);
  const std::size_t per_step = targets[0].size() / H;
  std::vector<std::size_t> steps = horizons;
  if (steps.empty())
    for (std::size_t h = 1; h <= H; ++h) steps.push_back(h);

  MetricReport report;
  for (auto step : steps) {
    if (step == 0 || step > H) {
      throw UsageError("horizon " + std::to_string(step) + " outside 1.." + std::to_string(H));
    }
    std::vector<double> p, t;
    p.reserve(per_step * predictions.size());
    t.reserve(per_step * predictions.size());
    for (std::size_t w = 0; w < predictions.size(); ++w) {
      if (predictions[w].shape() != targets[w].shape()) {
        throw DimensionError("evaluate: prediction " + shape_string(predictions[w].shape()) +
                             " vs target " + shape_string(targets[w].shape()));
      }
      const auto off = (step - 1) * per_step;
      p.insert(p.end(), predictions[w].values().begin() + off,
               predictions[w].values().begin() + off + per_step);
      t.insert(t.end(), targets[w].values().begin() + off,
               targets[w].values().begin() + off + per_step);
    }
    report.rows.push_back({step, horizon_label(step, interval_minutes),
                           compute_metrics(p, t, mask_threshold)});
  }
  return report;
}

std::string build_commit() { return STUNET_COMMIT; }

std::string hash_text(const std::string& text) {
  return printf_string("%016llx", static_cast<unsigned long long>(fnv1a(text)));
}

std::string format_report_text(const MetricReport& report, const Provenance& prov) {
  std::string out = provenance_lines(prov, "# ");
  out += printf_string("%-8s %-10s %12s %12s %12s %10s\n", "horizon", "label", "MAE", "MAPE(%)",
                       "RMSE", "count");
  for (const auto& r : report.rows) {
    out += printf_string("%-8zu %-10s %12.6f %12.6f %12.6f %10zu\n", r.step, r.label.c_str(),
                         r.values.mae, r.values.mape, r.values.rmse, r.values.count);
  }
  return out;
}

std::string format_report_csv(const MetricReport& report, const Provenance& prov) {
  std::string out = provenance_lines(prov, "# ");
  out += "horizon,label,mae,mape_percent,rmse,mse,count,mape_masked\n";
  for (const auto& r : report.rows) {
    out += printf_string("%zu,%s,%.10g,%.10g,%.10g,%.10g,%zu,%zu\n", r.step, r.label.c_str(),
                         r.values.mae, r.values.mape, r.values.rmse, r.values.mse, r.values.count,
                         r.values.mape_masked);
  }
  return out;
}

std::size_t default_ha_period(const TimeSeriesDataset& ds) {
  if (ds.interval_minutes <= 0) return 0;
  return static_cast<std::size_t>(std::llround(24.0 * 60.0 / ds.interval_minutes));
}

std::vector<Tensor> ha_baseline(const TimeSeriesDataset& ds, const WindowConfig& wc, Split split,
                                std::size_t period) {
  const auto windows = make_windows(ds, wc, split);
  const std::size_t row = ds.nodes * ds.features;
  const auto [train_begin, train_end] = ds.split_range(Split::train);

  // Phase means over the training split.
  std::vector<double> phase_sum, phase_count;
  if (period > 0) {
    phase_sum.assign(period * row, 0.0);
    phase_count.assign(period, 0.0);
    for (std::size_t t = train_begin; t < train_end; ++t) {
      const std::size_t ph = t % period;
      phase_count[ph] += 1.0;
      for (std::size_t c = 0; c < row; ++c) phase_sum[ph * row + c] += ds.values[t * row + c];
    }
  }

  std::vector<Tensor> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    std::vector<double> window_mean(row, 0.0);
    for (std::size_t j = 0; j < wc.input_length; ++j)
      for (std::size_t c = 0; c < row; ++c) window_mean[c] += w.input[j * row + c];
    for (auto& v : window_mean) v /= static_cast<double>(wc.input_length);

    std::vector<double> pred(wc.horizon * row);
    for (std::size_t h = 0; h < wc.horizon; ++h) {
      const std::size_t ph = period > 0 ? (w.start + wc.input_length + h) % period : 0;
      const bool seen = period > 0 && phase_count[ph] > 0;
      for (std::size_t c = 0; c < row; ++c) {
        pred[h * row + c] = seen ? phase_sum[ph * row + c] / phase_count[ph] : window_mean[c];
      }
    }
    out.emplace_back(Shape{wc.horizon, ds.nodes, ds.features}, std::move(pred));
  }
  return out;
}

}  // namespace stunet
