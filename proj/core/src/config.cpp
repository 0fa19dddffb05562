#include "mvlt/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mvlt/dataset.hpp"
#include "mvlt/errors.hpp"

using nlohmann::json;

namespace mvlt {
namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key) || j[key].is_null()) return;
  try {
    out = j[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + where + key + "' has the wrong type");
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(j,
                      {"manifest", "seed", "split_fraction", "network", "loss", "oversample",
                       "long_tail", "noise", "base_rates", "retrain_warm_start", "report_path"},
                      "");
  ExperimentConfig cfg;
  read_field(j, "manifest", cfg.manifest, "");
  read_field(j, "seed", cfg.seed, "");
  read_field(j, "split_fraction", cfg.split_fraction, "");
  read_field(j, "base_rates", cfg.base_rates, "");
  read_field(j, "retrain_warm_start", cfg.retrain_warm_start, "");
  read_field(j, "report_path", cfg.report_path, "");

  if (j.contains("network")) {
    const json& n = j["network"];
    reject_unknown_keys(n,
                        {"hidden", "hidden_per_view", "epochs", "step_size", "batch_size",
                         "optimizer", "early_stop"},
                        "network.");
    read_field(n, "hidden", cfg.network.hidden, "network.");
    read_field(n, "hidden_per_view", cfg.network.hidden_per_view, "network.");
    read_field(n, "epochs", cfg.network.epochs, "network.");
    read_field(n, "step_size", cfg.network.step_size, "network.");
    read_field(n, "batch_size", cfg.network.batch_size, "network.");
    read_field(n, "optimizer", cfg.network.optimizer, "network.");
    read_field(n, "early_stop", cfg.network.early_stop, "network.");
  }
  if (j.contains("loss")) {
    const json& l = j["loss"];
    reject_unknown_keys(l, {"anneal_epochs", "per_view_terms", "reduction"}, "loss.");
    read_field(l, "anneal_epochs", cfg.loss.anneal_epochs, "loss.");
    read_field(l, "per_view_terms", cfg.loss.per_view_terms, "loss.");
    read_field(l, "reduction", cfg.loss.reduction, "loss.");
  }
  if (j.contains("oversample")) {
    const json& o = j["oversample"];
    reject_unknown_keys(o, {"R", "transform", "target", "ablation"}, "oversample.");
    read_field(o, "R", cfg.oversample.r, "oversample.");
    read_field(o, "transform", cfg.oversample.transform, "oversample.");
    read_field(o, "target", cfg.oversample.target, "oversample.");
    read_field(o, "ablation", cfg.oversample.ablation, "oversample.");
  }
  if (j.contains("long_tail")) {
    const json& t = j["long_tail"];
    reject_unknown_keys(t, {"apply", "eta", "decay_form"}, "long_tail.");
    read_field(t, "apply", cfg.long_tail.apply, "long_tail.");
    read_field(t, "eta", cfg.long_tail.eta, "long_tail.");
    read_field(t, "decay_form", cfg.long_tail.decay_form, "long_tail.");
  }
  if (j.contains("noise")) {
    const json& n = j["noise"];
    reject_unknown_keys(n, {"kind", "sigma", "fraction", "clip"}, "noise.");
    read_field(n, "kind", cfg.noise.kind, "noise.");
    read_field(n, "sigma", cfg.noise.sigma, "noise.");
    read_field(n, "fraction", cfg.noise.fraction, "noise.");
    read_field(n, "clip", cfg.noise.clip, "noise.");
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void validate_config(const ExperimentConfig& cfg) {
  if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0)) {
    throw ConfigError("split_fraction must be in (0,1)");
  }
  if (cfg.network.hidden < 1) throw ConfigError("network.hidden must be >= 1");
  for (int h : cfg.network.hidden_per_view) {
    if (h < 1) throw ConfigError("network.hidden_per_view entries must be >= 1");
  }
  if (cfg.network.epochs < 0) throw ConfigError("network.epochs must be >= 0");
  if (!(cfg.network.step_size > 0.0)) throw ConfigError("network.step_size must be > 0");
  if (cfg.network.batch_size < 1) throw ConfigError("network.batch_size must be >= 1");
  if (cfg.network.optimizer != "adam" && cfg.network.optimizer != "gradient-descent") {
    throw ConfigError("network.optimizer must be adam or gradient-descent");
  }
  if (cfg.loss.anneal_epochs < 1) throw ConfigError("loss.anneal_epochs must be >= 1");
  if (cfg.loss.reduction != "mean" && cfg.loss.reduction != "sum") {
    throw ConfigError("loss.reduction must be mean or sum");
  }
  if (cfg.oversample.r < 1) throw ConfigError("oversample.R must be >= 1");
  if (cfg.oversample.transform != "inverse") {
    throw ConfigError("oversample.transform must be inverse");
  }
  if (cfg.oversample.target != "max") {
    try {
      if (std::stoi(cfg.oversample.target) < 1) throw ConfigError("");
    } catch (const std::exception&) {
      throw ConfigError("oversample.target must be 'max' or a positive integer");
    }
  }
  if (cfg.oversample.ablation != "full" && cfg.oversample.ablation != "v1-no-oversample" &&
      cfg.oversample.ablation != "v2-random-weights") {
    throw ConfigError("oversample.ablation must be full, v1-no-oversample, or v2-random-weights");
  }
  if (!(cfg.long_tail.eta > 0.0 && cfg.long_tail.eta <= 1.0)) {
    throw ConfigError("long_tail.eta must be in (0,1]");
  }
  decay_form_from_string(cfg.long_tail.decay_form);
  if (cfg.noise.kind != "none" && cfg.noise.kind != "gaussian" && cfg.noise.kind != "conflictive") {
    throw ConfigError("noise.kind must be none, gaussian, or conflictive");
  }
  if (cfg.noise.sigma < 0.0) throw ConfigError("noise.sigma must be >= 0");
  if (!(cfg.noise.fraction >= 0.0 && cfg.noise.fraction <= 1.0)) {
    throw ConfigError("noise.fraction must be in [0,1]");
  }
  if (cfg.noise.clip < 0.0) throw ConfigError("noise.clip must be >= 0");
  if (!cfg.base_rates.empty()) {
    double sum = 0.0;
    for (double a : cfg.base_rates) {
      if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("base_rates entries must be in [0,1]");
      sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("base_rates must sum to 1");
  }
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["manifest"] = cfg.manifest;
  j["seed"] = cfg.seed;
  j["split_fraction"] = cfg.split_fraction;
  j["network"] = {{"hidden", cfg.network.hidden},
                  {"hidden_per_view", cfg.network.hidden_per_view},
                  {"epochs", cfg.network.epochs},
                  {"step_size", cfg.network.step_size},
                  {"batch_size", cfg.network.batch_size},
                  {"optimizer", cfg.network.optimizer},
                  {"early_stop", cfg.network.early_stop}};
  j["loss"] = {{"anneal_epochs", cfg.loss.anneal_epochs},
               {"per_view_terms", cfg.loss.per_view_terms},
               {"reduction", cfg.loss.reduction}};
  j["oversample"] = {{"R", cfg.oversample.r},
                     {"transform", cfg.oversample.transform},
                     {"target", cfg.oversample.target},
                     {"ablation", cfg.oversample.ablation}};
  j["long_tail"] = {{"apply", cfg.long_tail.apply},
                    {"eta", cfg.long_tail.eta},
                    {"decay_form", cfg.long_tail.decay_form}};
  j["noise"] = {{"kind", cfg.noise.kind},
                {"sigma", cfg.noise.sigma},
                {"fraction", cfg.noise.fraction},
                {"clip", cfg.noise.clip}};
  j["base_rates"] = cfg.base_rates;
  j["retrain_warm_start"] = cfg.retrain_warm_start;
  j["report_path"] = cfg.report_path;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string dump = config_to_json(cfg).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace mvlt
