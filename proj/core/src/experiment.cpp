#include "mvlt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "mvlt/aggregation.hpp"
#include "mvlt/errors.hpp"
#include "mvlt/rng.hpp"

using nlohmann::json;

namespace mvlt {

namespace {

std::vector<double> resolve_base_rates(const ExperimentConfig& cfg, int num_classes) {
  if (cfg.base_rates.empty()) return uniform_base_rates(num_classes);
  if (static_cast<int>(cfg.base_rates.size()) != num_classes) {
    throw ConfigError("base_rates has " + std::to_string(cfg.base_rates.size()) +
                      " entries, dataset has " + std::to_string(num_classes) + " classes");
  }
  return cfg.base_rates;
}

std::vector<int> resolve_hidden_dims(const ExperimentConfig& cfg, int num_views) {
  if (cfg.network.hidden_per_view.empty()) {
    return std::vector<int>(static_cast<std::size_t>(num_views), cfg.network.hidden);
  }
  if (static_cast<int>(cfg.network.hidden_per_view.size()) != num_views) {
    throw ConfigError("network.hidden_per_view has " +
                      std::to_string(cfg.network.hidden_per_view.size()) +
                      " entries, dataset has " + std::to_string(num_views) + " views");
  }
  return cfg.network.hidden_per_view;
}

OptimizerConfig optimizer_from(const ExperimentConfig& cfg) {
  OptimizerConfig opt;
  opt.kind = cfg.network.optimizer == "adam" ? OptimizerConfig::Kind::adam
                                             : OptimizerConfig::Kind::gradient_descent;
  opt.step_size = cfg.network.step_size;
  opt.batch_size = cfg.network.batch_size;
  return opt;
}

LossSettings loss_settings_from(const ExperimentConfig& cfg) {
  LossSettings settings;
  settings.anneal_epochs = cfg.loss.anneal_epochs;
  settings.per_view_terms = cfg.loss.per_view_terms;
  settings.mean_reduction = cfg.loss.reduction == "mean";
  return settings;
}

TrainOptions train_options_from(const ExperimentConfig& cfg) {
  TrainOptions options;
  options.epochs = cfg.network.epochs;
  options.early_stop = cfg.network.early_stop;
  return options;
}

TrainedModel fit_nets(std::vector<ViewNetwork> nets, const MultiViewDataset& train_norm,
                      const ExperimentConfig& cfg, std::uint64_t shuffle_tag) {
  TrainedModel model;
  model.base_rates = resolve_base_rates(cfg, train_norm.num_classes);
  model.train_class_counts = train_norm.class_counts();
  model.nets = std::move(nets);
  model.state = train(model.nets, train_norm, optimizer_from(cfg), loss_settings_from(cfg),
                      train_options_from(cfg), Rng(cfg.seed).derive(shuffle_tag).seed());
  return model;
}

int resolve_target(const OversampleSettings& settings, const std::vector<int>& counts) {
  if (settings.target == "max") return *std::max_element(counts.begin(), counts.end());
  return std::stoi(settings.target);
}

struct RawSplit {
  MultiViewDataset train;
  MultiViewDataset test;
  std::vector<std::string> warnings;
};

RawSplit split_and_tail(const MultiViewDataset& raw, const ExperimentConfig& cfg) {
  validate_dataset(raw);
  Rng root(cfg.seed);
  RawSplit out;
  SplitResult parts = split(raw, cfg.split_fraction, root.derive(seed_tags::kSplit).seed());
  out.test = std::move(parts.test);
  if (cfg.long_tail.apply) {
    LongTailConfig tail;
    tail.eta = cfg.long_tail.eta;
    tail.decay_form = decay_form_from_string(cfg.long_tail.decay_form);
    tail.seed = root.derive(seed_tags::kLongTail).seed();
    LongTailResult tailed = make_long_tailed(parts.train, tail);
    out.train = std::move(tailed.data);
    out.warnings = std::move(tailed.warnings);
  } else {
    out.train = std::move(parts.train);
  }
  return out;
}

double group_accuracy(const std::vector<int>& group, const std::vector<int>& correct_per_class,
                      const std::vector<int>& total_per_class) {
  long correct = 0, total = 0;
  for (int k : group) {
    correct += correct_per_class[static_cast<std::size_t>(k)];
    total += total_per_class[static_cast<std::size_t>(k)];
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

PreparedData prepare_data(const MultiViewDataset& raw, const ExperimentConfig& cfg) {
  RawSplit parts = split_and_tail(raw, cfg);
  PreparedData out;
  out.normalization = fit_normalization(parts.train);
  out.train = apply_normalization(parts.train, out.normalization);
  out.test = apply_normalization(parts.test, out.normalization);
  out.warnings = std::move(parts.warnings);
  return out;
}

TrainedModel train_model(const MultiViewDataset& train_norm, const ExperimentConfig& cfg,
                         std::uint64_t init_tag, std::uint64_t shuffle_tag) {
  const std::vector<int> hidden = resolve_hidden_dims(cfg, train_norm.num_views());
  Rng init_root = Rng(cfg.seed).derive(init_tag);
  std::vector<ViewNetwork> nets;
  nets.reserve(static_cast<std::size_t>(train_norm.num_views()));
  for (int v = 0; v < train_norm.num_views(); ++v) {
    Rng stream = init_root.derive(static_cast<std::uint64_t>(v));
    nets.push_back(make_view_network(v, train_norm.views[static_cast<std::size_t>(v)].dim,
                                     hidden[static_cast<std::size_t>(v)],
                                     train_norm.num_classes, stream));
  }
  return fit_nets(std::move(nets), train_norm, cfg, shuffle_tag);
}

TrainedModel train_model_from(std::vector<ViewNetwork> nets, const MultiViewDataset& train_norm,
                              const ExperimentConfig& cfg, std::uint64_t shuffle_tag) {
  return fit_nets(std::move(nets), train_norm, cfg, shuffle_tag);
}

EvidenceTable compute_evidence_table(const std::vector<ViewNetwork>& nets,
                                     const MultiViewDataset& data) {
  EvidenceTable table;
  table.per_view.resize(nets.size());
  for (std::size_t v = 0; v < nets.size(); ++v) {
    table.per_view[v].reserve(static_cast<std::size_t>(data.size()));
  }
  table.joint.reserve(static_cast<std::size_t>(data.size()));
  for (int i = 0; i < data.size(); ++i) {
    std::vector<Evidence> per_view;
    per_view.reserve(nets.size());
    for (std::size_t v = 0; v < nets.size(); ++v) {
      per_view.push_back(forward(nets[v], data.views[v].row(i)));
    }
    table.joint.push_back(mean_evidence(per_view));
    for (std::size_t v = 0; v < nets.size(); ++v) {
      table.per_view[v].push_back(std::move(per_view[v]));
    }
  }
  return table;
}

MetricsReport evaluate_model(const TrainedModel& model, const MultiViewDataset& test_norm,
                             const NoiseSettings& noise, std::uint64_t noise_seed,
                             const std::string& phase) {
  MultiViewDataset eval = test_norm;
  if (noise.kind == "gaussian" && noise.sigma > 0.0) {
    eval = inject_gaussian(test_norm, noise.sigma, noise_seed);
  } else if (noise.kind == "conflictive" && noise.fraction > 0.0) {
    eval = inject_conflictive(test_norm, noise.fraction, noise_seed);
  }
  if (noise.clip > 0.0) {
    // Redescending winsorization: rows whose norm exceeds clip*sqrt(dim) are
    // shrunk by (cap/norm)^2, so far outliers contribute vanishing signal
    // instead of saturating at the cap.
    for (auto& view : eval.views) {
      const double cap = noise.clip * std::sqrt(static_cast<double>(view.dim));
      for (int i = 0; i < view.rows(); ++i) {
        auto row = view.row(i);
        double sq = 0.0;
        for (double x : row) sq += x * x;
        const double norm = std::sqrt(sq);
        if (norm > cap) {
          const double scale = (cap / norm) * (cap / norm);
          for (double& x : row) x *= scale;
        }
      }
    }
  }

  const int num_classes = model.nets.front().num_classes;
  std::vector<int> correct_per_class(static_cast<std::size_t>(num_classes), 0);
  std::vector<int> total_per_class(static_cast<std::size_t>(num_classes), 0);
  std::vector<double> uncertainties;
  uncertainties.reserve(static_cast<std::size_t>(eval.size()));

  MetricsReport report;
  report.phase = phase;
  report.uncertainty_histogram.assign(kUncertaintyBins, 0);

  long correct = 0;
  for (int i = 0; i < eval.size(); ++i) {
    Prediction p = predict(model.nets, eval, i, model.base_rates);
    const int truth = eval.labels[static_cast<std::size_t>(i)];
    total_per_class[static_cast<std::size_t>(truth)] += 1;
    if (p.decision == truth) {
      correct += 1;
      correct_per_class[static_cast<std::size_t>(truth)] += 1;
    }
    const double u = p.joint.uncertainty();
    uncertainties.push_back(u);
    const int bin = std::min(kUncertaintyBins - 1,
                             static_cast<int>(u * static_cast<double>(kUncertaintyBins)));
    report.uncertainty_histogram[static_cast<std::size_t>(bin)] += 1;
  }

  report.overall_accuracy =
      eval.size() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(eval.size());
  report.per_class_accuracy.resize(static_cast<std::size_t>(num_classes), 0.0);
  for (int k = 0; k < num_classes; ++k) {
    const std::size_t idx = static_cast<std::size_t>(k);
    report.per_class_accuracy[idx] =
        total_per_class[idx] == 0
            ? 0.0
            : static_cast<double>(correct_per_class[idx]) / total_per_class[idx];
  }

  report.partition = head_medium_tail(model.train_class_counts);
  report.head_accuracy = group_accuracy(report.partition.head, correct_per_class, total_per_class);
  report.medium_accuracy =
      group_accuracy(report.partition.medium, correct_per_class, total_per_class);
  report.tail_accuracy = group_accuracy(report.partition.tail, correct_per_class, total_per_class);

  if (!uncertainties.empty()) {
    double sum = 0.0;
    for (double u : uncertainties) sum += u;
    report.mean_uncertainty = sum / static_cast<double>(uncertainties.size());
    std::vector<double> sorted = uncertainties;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    report.median_uncertainty =
        n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }

  report.loss_history = model.state.loss_history;
  report.pseudo_counts_per_class.assign(static_cast<std::size_t>(num_classes), 0);
  return report;
}

OversampleOutcome run_oversample(const MultiViewDataset& train_norm, const TrainedModel& model,
                                 const ExperimentConfig& cfg) {
  OversampleOutcome out;
  out.pseudo_counts_per_class.assign(static_cast<std::size_t>(train_norm.num_classes), 0);

  const EvidenceTable evidences = compute_evidence_table(model.nets, train_norm);
  const std::vector<int> counts = train_norm.class_counts();
  const int target = resolve_target(cfg.oversample, counts);
  const WeightMode mode = cfg.oversample.ablation == "v2-random-weights" ? WeightMode::random
                                                                         : WeightMode::uncertainty;
  Rng root(cfg.seed);
  for (int k = 0; k < train_norm.num_classes; ++k) {
    if (counts[static_cast<std::size_t>(k)] >= target) continue;
    try {
      BalanceOutcome balanced =
          balance_class(train_norm, k, target, evidences, cfg.oversample.r, mode,
                        model.base_rates,
                        root.derive(seed_tags::kOversampleBase + static_cast<std::uint64_t>(k)));
      if (balanced.r_reduced) {
        out.warnings.push_back("class " + std::to_string(k) + ": neighbor count reduced to " +
                               std::to_string(balanced.effective_r) +
                               " (not enough class-mates)");
      }
      out.pseudo_counts_per_class[static_cast<std::size_t>(k)] =
          static_cast<int>(balanced.samples.size());
      for (PseudoSample& s : balanced.samples) out.pseudo.push_back(std::move(s));
    } catch (const UnbalanceableClassError&) {
      out.warnings.push_back("class " + std::to_string(k) +
                             " has fewer than 2 samples; cannot oversample, skipped");
    }
  }
  out.augmented = append_pseudo_samples(train_norm, out.pseudo);
  return out;
}

PipelineOutcome run_pipeline(const MultiViewDataset& raw, const ExperimentConfig& cfg) {
  validate_config(cfg);
  Rng root(cfg.seed);
  const std::uint64_t noise_seed = root.derive(seed_tags::kNoise).seed();

  PipelineOutcome out;
  out.prepared = prepare_data(raw, cfg);
  out.phase1_model =
      train_model(out.prepared.train, cfg, seed_tags::kPhase1Init, seed_tags::kPhase1Shuffle);
  out.phase1_model.normalization = out.prepared.normalization;
  out.phase1_report =
      evaluate_model(out.phase1_model, out.prepared.test, cfg.noise, noise_seed, "train");
  out.phase1_report.warnings = out.prepared.warnings;

  if (cfg.oversample.ablation == "v1-no-oversample") return out;

  OversampleOutcome oversampled = run_oversample(out.prepared.train, out.phase1_model, cfg);
  out.pseudo = oversampled.pseudo;
  TrainedModel phase2 =
      cfg.retrain_warm_start
          ? train_model_from(out.phase1_model.nets, oversampled.augmented, cfg,
                             seed_tags::kPhase2Shuffle)
          : train_model(oversampled.augmented, cfg, seed_tags::kPhase2Init,
                        seed_tags::kPhase2Shuffle);
  phase2.train_class_counts = out.phase1_model.train_class_counts;
  phase2.normalization = out.prepared.normalization;
  out.phase2_report = evaluate_model(phase2, out.prepared.test, cfg.noise, noise_seed, "retrained");
  out.phase2_report->pseudo_counts_per_class = oversampled.pseudo_counts_per_class;
  out.phase2_report->warnings = out.prepared.warnings;
  out.phase2_report->warnings.insert(out.phase2_report->warnings.end(),
                                     oversampled.warnings.begin(), oversampled.warnings.end());
  out.phase2_model = std::move(phase2);
  return out;
}

ModelCheckpoint make_checkpoint(const TrainedModel& model, const std::string& dataset_name,
                                const std::vector<int>& view_dims, const ExperimentConfig& cfg) {
  ModelCheckpoint checkpoint;
  checkpoint.dataset_name = dataset_name;
  checkpoint.num_classes = model.nets.front().num_classes;
  checkpoint.view_dims = view_dims;
  checkpoint.nets = model.nets;
  checkpoint.normalization = model.normalization;
  checkpoint.train_class_counts = model.train_class_counts;
  checkpoint.base_rates = model.base_rates;
  checkpoint.config_hash = config_hash(cfg);
  return checkpoint;
}

TrainedModel model_from_checkpoint(const ModelCheckpoint& checkpoint) {
  TrainedModel model;
  model.nets = checkpoint.nets;
  model.base_rates = checkpoint.base_rates;
  model.train_class_counts = checkpoint.train_class_counts;
  model.normalization = checkpoint.normalization;
  return model;
}

TrainOutcome cmd_train(const ExperimentConfig& cfg) {
  validate_config(cfg);
  MultiViewDataset raw = load_dataset(cfg.manifest);
  PreparedData prepared = prepare_data(raw, cfg);

  TrainOutcome out;
  out.dataset_name = raw.name;
  out.view_dims = raw.view_dims();
  out.model = train_model(prepared.train, cfg, seed_tags::kPhase1Init, seed_tags::kPhase1Shuffle);
  out.model.normalization = prepared.normalization;
  out.report = evaluate_model(out.model, prepared.test, cfg.noise,
                              Rng(cfg.seed).derive(seed_tags::kNoise).seed(), "train");
  out.report.warnings = prepared.warnings;
  return out;
}

RetrainOutcome cmd_oversample_retrain(const ExperimentConfig& cfg,
                                      const ModelCheckpoint& phase1) {
  validate_config(cfg);
  MultiViewDataset raw = load_dataset(cfg.manifest);
  check_compatible(phase1, raw);

  std::vector<std::string> warnings;
  if (phase1.config_hash != config_hash(cfg)) {
    warnings.push_back("config differs from the one the checkpoint was trained with");
  }

  RawSplit parts = split_and_tail(raw, cfg);
  warnings.insert(warnings.end(), parts.warnings.begin(), parts.warnings.end());
  const MultiViewDataset train_norm = apply_normalization(parts.train, phase1.normalization);
  const MultiViewDataset test_norm = apply_normalization(parts.test, phase1.normalization);

  const TrainedModel phase1_model = model_from_checkpoint(phase1);
  const std::uint64_t noise_seed = Rng(cfg.seed).derive(seed_tags::kNoise).seed();

  RetrainOutcome out;
  out.dataset_name = raw.name;
  out.view_dims = raw.view_dims();
  out.phase1_report = evaluate_model(phase1_model, test_norm, cfg.noise, noise_seed, "train");

  OversampleOutcome oversampled;
  if (cfg.oversample.ablation == "v1-no-oversample") {
    oversampled.augmented = train_norm;
    oversampled.pseudo_counts_per_class.assign(static_cast<std::size_t>(train_norm.num_classes),
                                               0);
  } else {
    oversampled = run_oversample(train_norm, phase1_model, cfg);
  }
  out.pseudo = oversampled.pseudo;
  warnings.insert(warnings.end(), oversampled.warnings.begin(), oversampled.warnings.end());

  out.model = cfg.retrain_warm_start
                  ? train_model_from(phase1.nets, oversampled.augmented, cfg,
                                     seed_tags::kPhase2Shuffle)
                  : train_model(oversampled.augmented, cfg, seed_tags::kPhase2Init,
                                seed_tags::kPhase2Shuffle);
  out.model.train_class_counts = phase1.train_class_counts;
  out.model.normalization = phase1.normalization;

  out.report = evaluate_model(out.model, test_norm, cfg.noise, noise_seed, "retrained");
  out.report.pseudo_counts_per_class = oversampled.pseudo_counts_per_class;
  out.report.warnings = std::move(warnings);
  return out;
}

MetricsReport cmd_evaluate(const ModelCheckpoint& checkpoint, const MultiViewDataset& raw_eval,
                           const NoiseSettings& noise, std::uint64_t seed) {
  validate_dataset(raw_eval);
  check_compatible(checkpoint, raw_eval);
  const MultiViewDataset normalized = apply_normalization(raw_eval, checkpoint.normalization);
  return evaluate_model(model_from_checkpoint(checkpoint), normalized, noise,
                        Rng(seed).derive(seed_tags::kNoise).seed(), "evaluate");
}

SweepOutcome cmd_sweep(const ExperimentConfig& base, const std::string& parameter,
                       const std::vector<double>& values) {
  if (parameter != "R" && parameter != "eta") {
    throw ConfigError("sweep parameter must be R or eta");
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value");

  SweepOutcome out;
  out.parameter = parameter;

  std::vector<double> unique;
  for (double v : values) {
    if (std::find(unique.begin(), unique.end(), v) != unique.end()) {
      out.notices.push_back("duplicate value " + std::to_string(v) + " dropped");
      continue;
    }
    unique.push_back(v);
  }

  const MultiViewDataset raw = load_dataset(base.manifest);
  for (double v : unique) {
    SweepRow row;
    row.value = v;
    ExperimentConfig cfg = base;
    try {
      if (parameter == "R") {
        const int r = static_cast<int>(std::llround(v));
        if (static_cast<double>(r) != v || r < 1) {
          throw ConfigError("R must be a positive integer, got " + std::to_string(v));
        }
        cfg.oversample.r = r;
      } else {
        if (v <= 0.0) {
          out.notices.push_back("decay rate " + std::to_string(v) +
                                " is degenerate; clamped to 1e-6");
          row.value = 1e-6;
        }
        cfg.long_tail.eta = row.value;
      }
      validate_config(cfg);
      PipelineOutcome run = run_pipeline(raw, cfg);
      row.phase1_report = run.phase1_report;
      if (run.phase2_report) row.phase2_report = *run.phase2_report;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

void cmd_dump_evidence(const ModelCheckpoint& checkpoint, const MultiViewDataset& raw,
                       const std::string& out_path) {
  validate_dataset(raw);
  check_compatible(checkpoint, raw);
  const MultiViewDataset data = apply_normalization(raw, checkpoint.normalization);

  const std::filesystem::path p(out_path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw DataError("cannot write evidence dump " + out_path);

  char buf[40];
  for (int i = 0; i < data.size(); ++i) {
    std::vector<Evidence> per_view;
    per_view.reserve(checkpoint.nets.size());
    for (const ViewNetwork& net : checkpoint.nets) {
      per_view.push_back(forward(net, data.views[static_cast<std::size_t>(net.view_id)].row(i)));
    }
    const Evidence joint = mean_evidence(per_view);
    const Opinion o = opinion_from_evidence(joint, checkpoint.base_rates);
    for (int k = 0; k < joint.k(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", joint[k]);
      out << buf << ' ';
    }
    out << data.labels[static_cast<std::size_t>(i)] << ' ';
    std::snprintf(buf, sizeof(buf), "%.17g", o.uncertainty());
    out << buf << '\n';
  }
}

std::string format_sweep_table(const SweepOutcome& sweep) {
  std::string table;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %-8s %-10s %-10s %-10s %-10s %-10s\n",
                sweep.parameter.c_str(), "status", "accuracy", "head", "medium", "tail", "mean_u");
  table += line;
  for (const SweepRow& row : sweep.rows) {
    if (row.failed) {
      std::snprintf(line, sizeof(line), "%-10.4g %-8s %s\n", row.value, "failed",
                    row.error.c_str());
      table += line;
      continue;
    }
    const MetricsReport& r = row.final_report();
    std::snprintf(line, sizeof(line), "%-10.4g %-8s %-10.4f %-10.4f %-10.4f %-10.4f %-10.4f\n",
                  row.value, "ok", r.overall_accuracy, r.head_accuracy, r.medium_accuracy,
                  r.tail_accuracy, r.mean_uncertainty);
    table += line;
  }
  return table;
}

json sweep_document(const SweepOutcome& sweep, const ExperimentConfig& base,
                    double wall_clock_seconds) {
  json rows = json::array();
  for (const SweepRow& row : sweep.rows) {
    json r;
    r["value"] = row.value;
    r["failed"] = row.failed;
    if (row.failed) {
      r["error"] = row.error;
    } else {
      r["phase1_metrics"] = metrics_to_json(row.phase1_report);
      if (row.phase2_report) r["metrics"] = metrics_to_json(*row.phase2_report);
    }
    rows.push_back(std::move(r));
  }
  json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["kind"] = "sweep";
  doc["parameter"] = sweep.parameter;
  doc["config"] = config_to_json(base);
  doc["rows"] = std::move(rows);
  doc["notices"] = sweep.notices;
  doc["wall_clock_seconds"] = wall_clock_seconds;
  return doc;
}

}  // namespace mvlt
