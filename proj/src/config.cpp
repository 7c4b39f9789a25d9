#include "stunet/config.hpp"

#include <algorithm>
#include <fstream>

#include "stunet/errors.hpp"
#include "text_util.hpp"

namespace stunet {

namespace {

std::string diffusion_name(DiffusionForm f) {
  return f == DiffusionForm::random_walk ? "random_walk" : "symmetric";
}

const char* const kUnhashed[] = {"adjacency", "series", "checkpoint", "out", "window", "threads"};

}  // namespace

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  using namespace detail;
  const std::string key(trim(raw_key));
  const std::string value(trim(raw_value));
  if (model.set(key, value)) return;
  if (key == "epochs") train.epochs = parse_unsigned(key, value);
  else if (key == "batch_size") train.batch_size = parse_unsigned(key, value);
  else if (key == "learning_rate") train.learning_rate = parse_double(key, value);
  else if (key == "lr_decay") train.lr_decay = parse_double(key, value);
  else if (key == "lr_decay_interval") train.lr_decay_interval = parse_unsigned(key, value);
  else if (key == "clip_norm") train.clip_norm = parse_double(key, value);
  else if (key == "scheduled_sampling") train.scheduled_sampling = parse_bool(key, value);
  else if (key == "sampling_tau") train.sampling_tau = parse_double(key, value);
  else if (key == "variant") variant = parse_variant(value);
  else if (key == "adjacency") adjacency = value;
  else if (key == "series") series = value;
  else if (key == "checkpoint") checkpoint = value;
  else if (key == "out") out = value;
  else if (key == "window") window = value;
  else if (key == "adjacency_format") adjacency_options.format = parse_adjacency_format(value);
  else if (key == "adjacency_sigma") adjacency_options.sigma = parse_double(key, value);
  else if (key == "adjacency_epsilon") adjacency_options.epsilon = parse_double(key, value);
  else if (key == "num_nodes") adjacency_options.num_nodes = parse_unsigned(key, value);
  else if (key == "features") features = parse_unsigned(key, value);
  else if (key == "interval_minutes") interval_minutes = parse_double(key, value);
  else if (key == "train_fraction") train_fraction = parse_double(key, value);
  else if (key == "val_fraction") val_fraction = parse_double(key, value);
  else if (key == "horizons") horizons = value.empty() ? std::vector<std::size_t>{} : parse_size_list(key, value);
  else if (key == "ha_period") {
    if (value == "auto") ha_period.reset();
    else ha_period = parse_unsigned(key, value);
  } else if (key == "seeds") {
    seeds.clear();
    for (auto s : parse_size_list(key, value)) seeds.push_back(s);
  } else if (key == "eval_batch") eval_batch = parse_unsigned(key, value);
  else if (key == "threads") threads = parse_unsigned(key, value);
  else if (key == "synth_rows") synth_rows = parse_unsigned(key, value);
  else if (key == "synth_cols") synth_cols = parse_unsigned(key, value);
  else if (key == "synth_steps") synth.steps = parse_unsigned(key, value);
  else if (key == "synth_alpha") synth.alpha = parse_double(key, value);
  else if (key == "synth_noise") synth.noise = parse_double(key, value);
  else if (key == "synth_form") {
    if (value == "random_walk") synth.form = DiffusionForm::random_walk;
    else if (value == "symmetric") synth.form = DiffusionForm::symmetric;
    else throw UsageError("synth_form: expected random_walk or symmetric, got '" + value + "'");
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

KeyValues RunConfig::to_pairs() const {
  using detail::format_double;
  KeyValues kv = model.to_pairs();
  const KeyValues rest = {
      {"epochs", std::to_string(train.epochs)},
      {"batch_size", std::to_string(train.batch_size)},
      {"learning_rate", format_double(train.learning_rate)},
      {"lr_decay", format_double(train.lr_decay)},
      {"lr_decay_interval", std::to_string(train.lr_decay_interval)},
      {"clip_norm", format_double(train.clip_norm)},
      {"scheduled_sampling", train.scheduled_sampling ? "true" : "false"},
      {"sampling_tau", format_double(train.sampling_tau)},
      {"variant", to_string(variant)},
      {"adjacency", adjacency.string()},
      {"series", series.string()},
      {"checkpoint", checkpoint.string()},
      {"out", out.string()},
      {"window", window.string()},
      {"adjacency_format", to_string(adjacency_options.format)},
      {"adjacency_sigma", format_double(adjacency_options.sigma)},
      {"adjacency_epsilon", format_double(adjacency_options.epsilon)},
      {"num_nodes", std::to_string(adjacency_options.num_nodes)},
      {"features", std::to_string(features)},
      {"interval_minutes", format_double(interval_minutes)},
      {"train_fraction", format_double(train_fraction)},
      {"val_fraction", format_double(val_fraction)},
      {"horizons", detail::join(horizons)},
      {"ha_period", ha_period ? std::to_string(*ha_period) : "auto"},
      {"seeds", detail::join(seeds)},
      {"eval_batch", std::to_string(eval_batch)},
      {"threads", std::to_string(threads)},
      {"synth_rows", std::to_string(synth_rows)},
      {"synth_cols", std::to_string(synth_cols)},
      {"synth_steps", std::to_string(synth.steps)},
      {"synth_alpha", format_double(synth.alpha)},
      {"synth_noise", format_double(synth.noise)},
      {"synth_form", diffusion_name(synth.form)},
  };
  kv.insert(kv.end(), rest.begin(), rest.end());
  return kv;
}

STUNetConfig RunConfig::effective_model() const { return stunet::variant(model, variant); }

TrainOptions RunConfig::effective_train() const {
  auto t = train;
  t.seed = model.seed;
  return t;
}

void RunConfig::validate() const {
  effective_model().validate();
  if (train.batch_size == 0) throw UsageError("batch_size must be positive");
  if (!(train.lr_decay > 0.0 && train.lr_decay <= 1.0)) {
    throw UsageError("lr_decay must lie in (0, 1]");
  }
  if (train.lr_decay_interval == 0) throw UsageError("lr_decay_interval must be positive");
  if (!(train.learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
  if (features == 0) throw UsageError("features must be positive");
  if (model.input_dim != features || model.output_dim != features) {
    throw UsageError("input_dim and output_dim must equal features (" + std::to_string(features) +
                     ")");
  }
  if (!(train_fraction > 0.0 && val_fraction > 0.0 && train_fraction + val_fraction < 1.0)) {
    throw UsageError("train_fraction and val_fraction must be positive with sum below 1");
  }
  if (eval_batch == 0) throw UsageError("eval_batch must be positive");
  if (seeds.empty()) throw UsageError("seeds must list at least one seed");
  if (ha_period && *ha_period == 0) throw UsageError("ha_period must be positive or auto");
}

std::string RunConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : to_pairs()) {
    if (std::find(std::begin(kUnhashed), std::end(kUnhashed), k) != std::end(kUnhashed)) continue;
    out += k + "=" + v + "\n";
  }
  return out;
}

void load_run_config(const std::filesystem::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw UsageError(path.string() + ": cannot open config");
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    try {
      cfg.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + o + "'");
    cfg.set(o.substr(0, eq), o.substr(eq + 1));
  }
}

}  // namespace stunet
