#include "stunet/experiments.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "stunet/errors.hpp"
#include "text_util.hpp"

namespace stunet {

namespace {

double metric_value(const MetricValues& v, Metric m) {
  switch (m) {
    case Metric::mae: return v.mae;
    case Metric::mape: return v.mape;
    case Metric::rmse: return v.rmse;
    case Metric::mse: return v.mse;
  }
  return 0.0;
}

std::string config_line(const STUNetConfig& c) {
  std::string s;
  for (const auto& [k, v] : c.to_pairs()) {
    if (k == "seed") continue;
    if (!s.empty()) s += ' ';
    s += k + "=" + v;
  }
  return s;
}

ExperimentCell run_cell(const std::string& row, std::uint64_t seed, STUNetConfig config,
                        const PreparedData& data, const ExperimentOptions& options) {
  ExperimentCell cell;
  cell.row = row;
  cell.seed = seed;
  config.seed = seed;
  cell.config = config;
  auto train = options.train;
  train.seed = seed;
  try {
    STUNet model(config, data.raw.graph);
    const auto result = train_model(model, data, train);
    const auto f = forecast_split(model, data, Split::test, options.eval_batch);
    cell.report = evaluate_forecasts(f.predictions, f.targets, options.horizons,
                                     options.interval_minutes);
    cell.finished = true;
    cell.converged = result.best_val_loss < result.initial_val_loss;
    if (!cell.converged) cell.failure = "validation loss never improved";
  } catch (const NumericError& e) {
    cell.failure = std::string("diverged: ") + e.what();
  } catch (const Error& e) {
    cell.failure = e.what();
  }
  if (!cell.failure.empty()) spdlog::warn("{} seed {}: {}", row, seed, cell.failure);
  return cell;
}

ExperimentTable run_rows(const std::vector<std::pair<std::string, STUNetConfig>>& rows,
                         const PreparedData& data, const ExperimentOptions& options) {
  if (options.seeds.empty()) throw UsageError("experiment needs at least one seed");
  ExperimentTable table;
  table.seeds = options.seeds;
  for (const auto& r : rows) table.rows.push_back(r.first);
  table.cells.resize(rows.size() * options.seeds.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < table.cells.size(); i = next++) {
      const auto& [name, cfg] = rows[i / options.seeds.size()];
      table.cells[i] = run_cell(name, options.seeds[i % options.seeds.size()], cfg, data, options);
    }
  };
  const std::size_t n = std::min(resolve_threads(options.threads), table.cells.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  for (const auto& c : table.cells) {
    if (!c.finished) continue;
    for (const auto& r : c.report.rows) {
      table.horizons.push_back(r.step);
      table.labels.push_back(r.label);
    }
    break;
  }
  return table;
}

}  // namespace

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) {
    s.mean = s.stddev = std::nan("");
    return s;
  }
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::mae: return "MAE";
    case Metric::mape: return "MAPE(%)";
    case Metric::rmse: return "RMSE";
    case Metric::mse: return "MSE";
  }
  return "?";
}

Summary summarize_cell(const ExperimentTable& table, const std::string& row, std::size_t column,
                       Metric metric) {
  std::vector<double> v;
  for (const auto& c : table.cells) {
    if (c.row != row || !c.finished) continue;
    v.push_back(metric_value(c.report.rows.at(column).values, metric));
  }
  return summarize(v);
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("STUNET_THREADS")) {
    try {
      return std::max<std::size_t>(detail::parse_unsigned("STUNET_THREADS", env), 1);
    } catch (const UsageError&) {
      spdlog::warn("ignoring STUNET_THREADS={}", env);
    }
  }
  return 1;
}

ExperimentTable run_ablation(const STUNetConfig& base, const PreparedData& data,
                             const ExperimentOptions& options) {
  std::vector<std::pair<std::string, STUNetConfig>> rows;
  for (auto v : {Variant::gcgru, Variant::t_unet, Variant::s_unet, Variant::st_unet}) {
    rows.emplace_back(to_string(v), variant(base, v));
  }
  return run_rows(rows, data, options);
}

ExperimentTable run_upsampling_comparison(const STUNetConfig& base, const PreparedData& data,
                                          const ExperimentOptions& options) {
  std::vector<std::pair<std::string, STUNetConfig>> rows;
  for (auto m : {UnpoolMode::direct_copy, UnpoolMode::ordered_deconv, UnpoolMode::weighted_deconv}) {
    auto c = base;
    c.unpool = m;
    rows.emplace_back(to_string(m), c);
  }
  return run_rows(rows, data, options);
}

std::string format_table_text(const ExperimentTable& table, const std::vector<Metric>& metrics,
                              const Provenance& prov) {
  std::string out = "# config_hash: " + prov.config_hash + "\n# seeds:";
  for (auto s : table.seeds) out += " " + std::to_string(s);
  out += "\n# commit: " + prov.commit + "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out += "# " + table.rows[r] + ": " + config_line(table.cells[r * table.seeds.size()].config) +
           "\n";
  }

  char buf[128];
  std::snprintf(buf, sizeof buf, "%-16s %-8s", "row", "metric");
  out += buf;
  for (const auto& l : table.labels) {
    std::snprintf(buf, sizeof buf, " %22s", l.c_str());
    out += buf;
  }
  out += "  converged\n";
  for (const auto& row : table.rows) {
    std::size_t done = 0, conv = 0, total = 0;
    for (const auto& c : table.cells) {
      if (c.row != row) continue;
      ++total;
      done += c.finished;
      conv += c.converged;
    }
    for (auto m : metrics) {
      std::snprintf(buf, sizeof buf, "%-16s %-8s", row.c_str(), to_string(m).c_str());
      out += buf;
      for (std::size_t h = 0; h < table.horizons.size(); ++h) {
        const auto s = summarize_cell(table, row, h, m);
        std::snprintf(buf, sizeof buf, " %13.4f±%-8.4f", s.mean, s.stddev);
        out += buf;
      }
      out += "  " + std::to_string(conv) + "/" + std::to_string(total) + "\n";
    }
    if (done < total) out += "#   " + row + ": " + std::to_string(total - done) + " failed\n";
  }
  for (const auto& c : table.cells) {
    if (!c.failure.empty()) {
      out += "# note " + c.row + " seed " + std::to_string(c.seed) + ": " + c.failure + "\n";
    }
  }
  return out;
}

std::string format_table_csv(const ExperimentTable& table, const std::vector<Metric>& metrics,
                             const Provenance& prov) {
  std::string out = "# config_hash: " + prov.config_hash + "\n# seeds:";
  for (auto s : table.seeds) out += " " + std::to_string(s);
  out += "\n# commit: " + prov.commit + "\n";
  out += "row,seed,finished,converged,horizon,label";
  for (auto m : metrics) out += "," + to_string(m);
  out += "\n";
  char buf[64];
  for (const auto& c : table.cells) {
    const std::string head = c.row + "," + std::to_string(c.seed) + "," +
                             (c.finished ? "1" : "0") + "," + (c.converged ? "1" : "0") + ",";
    for (std::size_t h = 0; h < table.horizons.size(); ++h) {
      out += head + std::to_string(table.horizons[h]) + "," + table.labels[h];
      for (auto m : metrics) {
        if (c.finished) {
          std::snprintf(buf, sizeof buf, ",%.10g", metric_value(c.report.rows[h].values, m));
          out += buf;
        } else {
          out += ",nan";
        }
      }
      out += "\n";
    }
  }
  for (const auto& row : table.rows) {
    for (std::size_t h = 0; h < table.horizons.size(); ++h) {
      out += row + ",mean,,," + std::to_string(table.horizons[h]) + "," + table.labels[h];
      for (auto m : metrics) {
        std::snprintf(buf, sizeof buf, ",%.10g", summarize_cell(table, row, h, m).mean);
        out += buf;
      }
      out += "\n" + row + ",std,,," + std::to_string(table.horizons[h]) + "," + table.labels[h];
      for (auto m : metrics) {
        std::snprintf(buf, sizeof buf, ",%.10g", summarize_cell(table, row, h, m).stddev);
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace stunet
