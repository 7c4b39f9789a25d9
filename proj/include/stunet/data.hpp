#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stunet/graph.hpp"
#include "stunet/sampling.hpp"
#include "stunet/tensor.hpp"

namespace stunet {

enum class AdjacencyFormat { dense_csv, edge_list, distance_gaussian };

AdjacencyFormat parse_adjacency_format(const std::string& name);
std::string to_string(AdjacencyFormat format);

struct AdjacencyOptions {
  AdjacencyFormat format = AdjacencyFormat::dense_csv;
  double sigma = 1.0;    // distance_gaussian kernel width
  double epsilon = 0.1;  // distance_gaussian sparsity cutoff
  // Node count for edge and distance lists; 0 infers max index + 1.
  std::size_t num_nodes = 0;
};

// Throws DataError with path:line context on malformed or invalid input.
Graph load_adjacency(const std::filesystem::path& path, const AdjacencyOptions& options = {});
void write_dense_adjacency(const std::filesystem::path& path, const Graph& g);

enum class Split { train, val, test };

// Series values [T × N × D], row-major.
struct TimeSeriesDataset {
  std::vector<double> values;
  std::size_t steps = 0, nodes = 0, features = 0;
  Graph graph;
  double train_fraction = 0.7;
  double val_fraction = 0.1;
  double interval_minutes = 0.0;  // 0: unlabeled

  double at(std::size_t t, std::size_t n, std::size_t d) const {
    return values[(t * nodes + n) * features + d];
  }
  // [begin, end) step range of a split; contiguous and disjoint in time.
  std::pair<std::size_t, std::size_t> split_range(Split split) const;
};

// CSV with T rows of N·D columns (node-major, features inner). A first line
// that does not parse as numbers is taken as a header.
TimeSeriesDataset load_series(const std::filesystem::path& path, const Graph& graph,
                              std::size_t features = 1);
void write_series(const std::filesystem::path& path, const TimeSeriesDataset& ds);

struct WindowConfig {
  std::size_t input_length = 12;  // J
  std::size_t horizon = 12;       // H
};

struct Window {
  std::size_t start = 0;  // absolute step of the first input row
  Tensor input;           // [J × N × D]
  Tensor target;          // [H × N × D]
};

// Stride-1 windows lying wholly inside the split.
std::vector<Window> make_windows(const TimeSeriesDataset& ds, const WindowConfig& wc, Split split);

// Per-step batched tensors [N × B × D] for the selected windows.
struct Batch {
  Sequence inputs;
  Sequence targets;
};
Batch assemble_batch(std::span<const Window> windows, std::span<const std::size_t> indices);
Batch assemble_batch(std::span<const Window> windows);
// [J × N × D] window to J tensors [N × D].
Sequence window_steps(const Tensor& block);

class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> mean, std::vector<double> stddev);

  // Population statistics per feature over the training split. A zero
  // deviation is replaced by 1 with a warning.
  static Normalizer fit(const TimeSeriesDataset& ds);

  bool fitted() const { return !mean_.empty(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return std_; }

  // Feature index of flat position i is i % D. UsageError when unfitted.
  std::vector<double> apply(std::span<const double> values) const;
  std::vector<double> invert(std::span<const double> values) const;
  TimeSeriesDataset apply(const TimeSeriesDataset& ds) const;

 private:
  std::vector<double> mean_, std_;
};

enum class DiffusionForm { random_walk, symmetric };

struct SynthOptions {
  std::size_t steps = 2000;
  double alpha = 0.6;
  double noise = 0.05;
  std::uint64_t seed = 0;
  DiffusionForm form = DiffusionForm::random_walk;
  // X₀ entries; empty draws U(0, 1) per node.
  std::vector<double> initial;
};

// X_{t+1} = α·P·X_t + (1−α)·X_t + noise with P = D⁻¹W (isolated nodes keep
// their value), or X_{t+1} = X_t − (α/d_max)·(D−W)·X_t + noise in the
// symmetric form, which conserves the mean.
TimeSeriesDataset synth_diffusion(const Graph& g, const SynthOptions& options);

// rows × cols lattice, unit-weight 4-neighbour edges, node id r·cols + c.
Graph knn_grid_graph(std::size_t rows, std::size_t cols);

}  // namespace stunet
