#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stunet/data.hpp"
#include "stunet/model.hpp"
#include "stunet/training.hpp"

namespace stunet {

// Everything one CLI invocation needs. Keys are the flat names accepted in
// config files and by --set; model keys are those of STUNetConfig.
struct RunConfig {
  STUNetConfig model;
  TrainOptions train;
  Variant variant = Variant::st_unet;

  std::filesystem::path adjacency;
  std::filesystem::path series;
  std::filesystem::path checkpoint;
  std::filesystem::path out;
  std::filesystem::path window;  // predict input

  AdjacencyOptions adjacency_options;
  std::size_t features = 1;
  double interval_minutes = 0.0;
  double train_fraction = 0.7;
  double val_fraction = 0.1;
  std::vector<std::size_t> horizons;  // empty: every step
  std::optional<std::size_t> ha_period;  // unset: steps per day or fallback
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t eval_batch = 1;
  std::size_t threads = 0;

  std::size_t synth_rows = 4;
  std::size_t synth_cols = 8;
  SynthOptions synth;  // seed comes from the model seed

  // UsageError naming the key on an unknown key or malformed value.
  void set(const std::string& key, const std::string& value);
  // Every key in a fixed order; paths included.
  KeyValues to_pairs() const;
  // The variant applied to `model`, with the training seed following it.
  STUNetConfig effective_model() const;
  TrainOptions effective_train() const;
  void validate() const;
  // Canonical text of the result-affecting keys (paths and threads excluded).
  std::string canonical_text() const;
};

// Flat "key = value" lines; '#' starts a comment. UsageError with path:line.
void load_run_config(const std::filesystem::path& path, RunConfig& cfg);
// "key=value" override strings, applied in order.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides);

}  // namespace stunet
