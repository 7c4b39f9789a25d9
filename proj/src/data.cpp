#include "stunet/data.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <random>

#include "stunet/errors.hpp"
#include "text_util.hpp"

namespace stunet {

namespace {

struct CsvRow {
  std::size_t line = 0;
  std::vector<double> cells;
};

// Numeric rows of a CSV file; blank lines and '#' comments are skipped and
// a non-numeric first row is treated as a header.
std::vector<CsvRow> read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    CsvRow row{lineno, {}};
    bool numeric = true;
    for (auto cell : detail::split(text, ',')) {
      double v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        numeric = false;
        break;
      }
      if (!std::isfinite(v)) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": non-finite value '" +
                        std::string(cell) + "'");
      }
      row.cells.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed numeric row");
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

Graph to_graph(const std::filesystem::path& path, Eigen::MatrixXd w) {
  try {
    return Graph(std::move(w));
  } catch (const GraphError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace

AdjacencyFormat parse_adjacency_format(const std::string& name) {
  if (name == "dense_csv" || name == "dense") return AdjacencyFormat::dense_csv;
  if (name == "edge_list" || name == "edges") return AdjacencyFormat::edge_list;
  if (name == "distance_gaussian" || name == "distance") return AdjacencyFormat::distance_gaussian;
  throw UsageError("unknown adjacency format '" + name + "'");
}

std::string to_string(AdjacencyFormat format) {
  switch (format) {
    case AdjacencyFormat::dense_csv: return "dense_csv";
    case AdjacencyFormat::edge_list: return "edge_list";
    case AdjacencyFormat::distance_gaussian: return "distance_gaussian";
  }
  return "unknown";
}

Graph load_adjacency(const std::filesystem::path& path, const AdjacencyOptions& options) {
  const auto rows = read_numeric_csv(path);
  if (options.format == AdjacencyFormat::dense_csv) {
    const std::size_t n = rows.size();
    if (n == 0) throw DataError(path.string() + ": empty adjacency");
    Eigen::MatrixXd w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].cells.size() != n) {
        throw DataError(where(path, rows[i].line) + ": expected " + std::to_string(n) +
                        " columns, found " + std::to_string(rows[i].cells.size()));
      }
      for (std::size_t j = 0; j < n; ++j) {
        const double v = rows[i].cells[j];
        if (v < 0) throw DataError(where(path, rows[i].line) + ": negative weight");
        if (i == j && v != 0) throw DataError(where(path, rows[i].line) + ": nonzero diagonal");
        w(i, j) = v;
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::abs(w(i, j) - w(j, i)) > 1e-8) {
          throw DataError(where(path, rows[i].line) + ": asymmetric entry (" + std::to_string(i) +
                          "," + std::to_string(j) + ")");
        }
        w(i, j) = w(j, i) = 0.5 * (w(i, j) + w(j, i));
      }
    return to_graph(path, std::move(w));
  }

  struct Triple {
    std::size_t i, j;
    double value;
    std::size_t line;
  };
  std::vector<Triple> triples;
  std::size_t n = options.num_nodes;
  std::size_t max_index = 0;
  for (const auto& r : rows) {
    if (r.cells.size() != 3) throw DataError(where(path, r.line) + ": expected i,j,value");
    auto index = [&](double v) {
      if (v < 0 || v != std::floor(v)) throw DataError(where(path, r.line) + ": bad node index");
      return static_cast<std::size_t>(v);
    };
    Triple t{index(r.cells[0]), index(r.cells[1]), r.cells[2], r.line};
    if (t.i == t.j) throw DataError(where(path, r.line) + ": self loop");
    if (t.value < 0) throw DataError(where(path, r.line) + ": negative value");
    max_index = std::max({max_index, t.i, t.j});
    triples.push_back(t);
  }
  if (n == 0) n = triples.empty() ? 0 : max_index + 1;
  if (n == 0) throw DataError(path.string() + ": no edges and no node count");
  if (!triples.empty() && max_index >= n) {
    throw DataError(path.string() + ": node index " + std::to_string(max_index) +
                    " out of range for N=" + std::to_string(n));
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  const double s2 = options.sigma * options.sigma;
  for (const auto& t : triples) {
    double v = t.value;
    if (options.format == AdjacencyFormat::distance_gaussian) {
      v = std::exp(-(t.value * t.value) / s2);
      if (v < options.epsilon) v = 0.0;
    }
    w(t.i, t.j) = w(t.j, t.i) = std::max(w(t.i, t.j), v);
  }
  return to_graph(path, std::move(w));
}

void write_dense_adjacency(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  const auto n = g.num_nodes();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out << ',';
      out << detail::format_double(g.weight(i, j));
    }
    out << '\n';
  }
  if (!out) throw DataError(path.string() + ": write failed");
}

std::pair<std::size_t, std::size_t> TimeSeriesDataset::split_range(Split split) const {
  const auto train_end = static_cast<std::size_t>(std::floor(train_fraction * steps));
  const auto val_end =
      std::min(steps, static_cast<std::size_t>(std::floor((train_fraction + val_fraction) * steps)));
  switch (split) {
    case Split::train: return {0, train_end};
    case Split::val: return {train_end, val_end};
    case Split::test: return {val_end, steps};
  }
  return {0, 0};
}

TimeSeriesDataset load_series(const std::filesystem::path& path, const Graph& graph,
                              std::size_t features) {
  if (features == 0) throw UsageError("load_series: feature count must be positive");
  const auto rows = read_numeric_csv(path);
  TimeSeriesDataset ds;
  ds.graph = graph;
  ds.nodes = graph.num_nodes();
  ds.features = features;
  ds.steps = rows.size();
  const std::size_t width = ds.nodes * features;
  if (rows.empty()) throw DataError(path.string() + ": no data rows");
  ds.values.reserve(ds.steps * width);
  for (const auto& r : rows) {
    if (r.cells.size() != width) {
      throw DataError(where(path, r.line) + ": expected " + std::to_string(width) +
                      " columns (N=" + std::to_string(ds.nodes) + " x D=" +
                      std::to_string(features) + "), found " + std::to_string(r.cells.size()));
    }
    ds.values.insert(ds.values.end(), r.cells.begin(), r.cells.end());
  }
  return ds;
}

void write_series(const std::filesystem::path& path, const TimeSeriesDataset& ds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  const std::size_t width = ds.nodes * ds.features;
  for (std::size_t t = 0; t < ds.steps; ++t) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c) out << ',';
      out << detail::format_double(ds.values[t * width + c]);
    }
    out << '\n';
  }
  if (!out) throw DataError(path.string() + ": write failed");
}

std::vector<Window> make_windows(const TimeSeriesDataset& ds, const WindowConfig& wc,
                                 Split split) {
  if (wc.input_length == 0 || wc.horizon == 0) throw UsageError("window lengths must be positive");
  const auto [begin, end] = ds.split_range(split);
  const std::size_t span = wc.input_length + wc.horizon;
  if (end - begin < span) {
    throw DataError("split has " + std::to_string(end - begin) + " steps, windows need J+H=" +
                    std::to_string(span));
  }
  const std::size_t row = ds.nodes * ds.features;
  std::vector<Window> out;
  out.reserve(end - begin - span + 1);
  for (std::size_t s = begin; s + span <= end; ++s) {
    const double* base = ds.values.data() + s * row;
    Window w;
    w.start = s;
    w.input = Tensor({wc.input_length, ds.nodes, ds.features},
                     std::vector<double>(base, base + wc.input_length * row));
    const double* tb = base + wc.input_length * row;
    w.target = Tensor({wc.horizon, ds.nodes, ds.features},
                      std::vector<double>(tb, tb + wc.horizon * row));
    out.push_back(std::move(w));
  }
  return out;
}

namespace {

Sequence interleave(std::span<const Window> windows, std::span<const std::size_t> indices,
                    bool targets) {
  const Tensor& first = targets ? windows[indices[0]].target : windows[indices[0]].input;
  const std::size_t steps = first.extent(0), n = first.extent(1), d = first.extent(2);
  const std::size_t b = indices.size();
  Sequence out;
  out.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> v(n * b * d);
    for (std::size_t k = 0; k < b; ++k) {
      const Tensor& src = targets ? windows[indices[k]].target : windows[indices[k]].input;
      const double* p = src.values().data() + t * n * d;
      for (std::size_t i = 0; i < n; ++i)
        std::copy(p + i * d, p + (i + 1) * d, v.begin() + (i * b + k) * d);
    }
    out.emplace_back(Shape{n, b, d}, std::move(v));
  }
  return out;
}

}  // namespace

Batch assemble_batch(std::span<const Window> windows, std::span<const std::size_t> indices) {
  if (indices.empty()) throw UsageError("assemble_batch: empty batch");
  for (auto i : indices)
    if (i >= windows.size()) throw UsageError("assemble_batch: window index out of range");
  return {interleave(windows, indices, false), interleave(windows, indices, true)};
}

Batch assemble_batch(std::span<const Window> windows) {
  std::vector<std::size_t> all(windows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return assemble_batch(windows, all);
}

Sequence window_steps(const Tensor& block) {
  const std::size_t steps = block.extent(0), n = block.extent(1), d = block.extent(2);
  Sequence out;
  for (std::size_t t = 0; t < steps; ++t) {
    const double* p = block.values().data() + t * n * d;
    out.emplace_back(Shape{n, d}, std::vector<double>(p, p + n * d));
  }
  return out;
}

Normalizer::Normalizer(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), std_(std::move(stddev)) {
  if (mean_.size() != std_.size()) throw UsageError("normalizer: mean/std length mismatch");
  for (double s : std_)
    if (!(s > 0)) throw UsageError("normalizer: standard deviation must be positive");
}

Normalizer Normalizer::fit(const TimeSeriesDataset& ds) {
  const auto [begin, end] = ds.split_range(Split::train);
  if (end <= begin) throw DataError("normalizer: empty training split");
  const std::size_t d = ds.features;
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  const double count = static_cast<double>((end - begin) * ds.nodes);
  for (std::size_t t = begin; t < end; ++t)
    for (std::size_t n = 0; n < ds.nodes; ++n)
      for (std::size_t f = 0; f < d; ++f) mean[f] += ds.at(t, n, f);
  for (auto& m : mean) m /= count;
  for (std::size_t t = begin; t < end; ++t)
    for (std::size_t n = 0; n < ds.nodes; ++n)
      for (std::size_t f = 0; f < d; ++f) {
        const double e = ds.at(t, n, f) - mean[f];
        var[f] += e * e;
      }
  std::vector<double> stddev(d);
  for (std::size_t f = 0; f < d; ++f) {
    stddev[f] = std::sqrt(var[f] / count);
    if (!(stddev[f] > 0)) {
      spdlog::warn("feature {} is constant on the training split; using unit scale", f);
      stddev[f] = 1.0;
    }
  }
  return Normalizer(std::move(mean), std::move(stddev));
}

std::vector<double> Normalizer::apply(std::span<const double> values) const {
  if (!fitted()) throw UsageError("normalizer used before fit");
  std::vector<double> out(values.size());
  const std::size_t d = mean_.size();
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean_[i % d]) / std_[i % d];
  return out;
}

std::vector<double> Normalizer::invert(std::span<const double> values) const {
  if (!fitted()) throw UsageError("normalizer used before fit");
  std::vector<double> out(values.size());
  const std::size_t d = mean_.size();
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * std_[i % d] + mean_[i % d];
  return out;
}

TimeSeriesDataset Normalizer::apply(const TimeSeriesDataset& ds) const {
  if (fitted() && mean_.size() != ds.features) {
    throw UsageError("normalizer has " + std::to_string(mean_.size()) + " features, dataset " +
                     std::to_string(ds.features));
  }
  TimeSeriesDataset out = ds;
  out.values = apply(std::span<const double>(ds.values));
  return out;
}

TimeSeriesDataset synth_diffusion(const Graph& g, const SynthOptions& options) {
  const std::size_t n = g.num_nodes();
  if (!(options.alpha >= 0.0 && options.alpha < 1.0)) {
    throw UsageError("synth_diffusion: alpha must lie in [0, 1)");
  }
  if (options.noise < 0) throw UsageError("synth_diffusion: noise must be non-negative");
  if (options.steps == 0) throw UsageError("synth_diffusion: steps must be positive");
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::VectorXd x(n);
  if (!options.initial.empty()) {
    if (options.initial.size() != n) throw UsageError("synth_diffusion: initial state size != N");
    for (std::size_t i = 0; i < n; ++i) x[i] = options.initial[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) x[i] = unit(rng);
  }

  Eigen::MatrixXd step(n, n);
  const Eigen::MatrixXd& w = g.weights();
  if (options.form == DiffusionForm::random_walk) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = g.degree(i);
      if (d > 0) p.row(i) = w.row(i) / d;
      else p(i, i) = 1.0;
    }
    step = options.alpha * p + (1.0 - options.alpha) * Eigen::MatrixXd::Identity(n, n);
  } else {
    double dmax = 0;
    for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, g.degree(i));
    Eigen::MatrixXd lap = -w;
    for (std::size_t i = 0; i < n; ++i) lap(i, i) += g.degree(i);
    step = Eigen::MatrixXd::Identity(n, n);
    if (dmax > 0) step -= (options.alpha / dmax) * lap;
  }

  TimeSeriesDataset ds;
  ds.graph = g;
  ds.nodes = n;
  ds.features = 1;
  ds.steps = options.steps;
  ds.values.reserve(options.steps * n);
  for (std::size_t t = 0; t < options.steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) ds.values.push_back(x[i]);
    Eigen::VectorXd next = step * x;
    if (options.noise > 0)
      for (std::size_t i = 0; i < n; ++i) next[i] += options.noise * gauss(rng);
    x = std::move(next);
  }
  return ds;
}

Graph knn_grid_graph(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw UsageError("knn_grid_graph: rows and cols must be positive");
  std::vector<Edge> edges;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t id = r * cols + c;
      if (c + 1 < cols) edges.push_back({id, id + 1, 1.0});
      if (r + 1 < rows) edges.push_back({id, id + cols, 1.0});
    }
  return Graph::from_edges(rows * cols, edges);
}

}  // namespace stunet
