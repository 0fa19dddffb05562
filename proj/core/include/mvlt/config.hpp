#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace mvlt {

struct NetworkSettings {
  int hidden = 64;
  std::vector<int> hidden_per_view;  // optional override, one entry per view
  int epochs = 200;
  double step_size = 1e-3;
  int batch_size = 64;
  std::string optimizer = "adam";  // adam | gradient-descent
  bool early_stop = false;
};

struct LossSchedule {
  int anneal_epochs = 10;
  bool per_view_terms = true;
  std::string reduction = "mean";  // mean | sum
};

struct OversampleSettings {
  int r = 3;
  std::string transform = "inverse";
  std::string target = "max";  // max | an explicit positive integer as string
  std::string ablation = "full";  // full | v1-no-oversample | v2-random-weights
};

struct LongTailSettings {
  bool apply = true;
  double eta = 0.3;
  std::string decay_form = "normalized-exponent";
};

struct NoiseSettings {
  std::string kind = "none";  // none | gaussian | conflictive
  double sigma = 0.0;
  double fraction = 1.0;
  double clip = 0.0;  // >0: shrink eval view rows beyond clip*sqrt(dim) by (cap/norm)^2
};

// Every tunable of the pipeline. All fields have validated defaults; the
// resolved form is embedded verbatim in every report.
struct ExperimentConfig {
  std::string manifest;
  std::uint64_t seed = 7;
  double split_fraction = 0.8;
  NetworkSettings network;
  LossSchedule loss;
  OversampleSettings oversample;
  LongTailSettings long_tail;
  NoiseSettings noise;
  std::vector<double> base_rates;  // empty = uniform
  bool retrain_warm_start = false;
  std::string report_path;
};

// Strict parse: unknown keys are rejected. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& cfg);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

// FNV-1a over the canonical serialized form.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace mvlt
