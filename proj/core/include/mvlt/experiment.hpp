#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvlt/checkpoint.hpp"
#include "mvlt/config.hpp"
#include "mvlt/dataset.hpp"
#include "mvlt/network.hpp"
#include "mvlt/oversample.hpp"
#include "mvlt/report.hpp"

namespace mvlt {

// Fixed stream ids hung off the master seed. Every random decision in a run
// draws from one of these, so a (config, seed) pair fully determines the run.
namespace seed_tags {
inline constexpr std::uint64_t kSplit = 11;
inline constexpr std::uint64_t kLongTail = 12;
inline constexpr std::uint64_t kPhase1Init = 21;
inline constexpr std::uint64_t kPhase1Shuffle = 22;
inline constexpr std::uint64_t kPhase2Init = 31;
inline constexpr std::uint64_t kPhase2Shuffle = 32;
inline constexpr std::uint64_t kNoise = 41;
inline constexpr std::uint64_t kOversampleBase = 1280;  // + class id
}  // namespace seed_tags

// Train/test views after split, optional long-tailing of train, and z-score
// normalization fit on train only.
struct PreparedData {
  MultiViewDataset train;
  MultiViewDataset test;
  NormalizationStats normalization;
  std::vector<std::string> warnings;
};

PreparedData prepare_data(const MultiViewDataset& raw, const ExperimentConfig& cfg);

// One trained phase. train_class_counts always holds the pre-oversampling
// counts; they define the head/medium/tail partition even after augmentation.
struct TrainedModel {
  std::vector<ViewNetwork> nets;
  std::vector<double> base_rates;
  std::vector<int> train_class_counts;
  NormalizationStats normalization;
  TrainState state;
};

// init_tag/shuffle_tag pick the seed streams (phase 1 vs phase 2 above).
TrainedModel train_model(const MultiViewDataset& train_norm, const ExperimentConfig& cfg,
                         std::uint64_t init_tag, std::uint64_t shuffle_tag);

// Same, but starting from the given parameters (warm start).
TrainedModel train_model_from(std::vector<ViewNetwork> nets, const MultiViewDataset& train_norm,
                              const ExperimentConfig& cfg, std::uint64_t shuffle_tag);

EvidenceTable compute_evidence_table(const std::vector<ViewNetwork>& nets,
                                     const MultiViewDataset& data);

// Applies the configured noise to the normalized test set, then scores the
// model: accuracies, uncertainty statistics, histogram.
MetricsReport evaluate_model(const TrainedModel& model, const MultiViewDataset& test_norm,
                             const NoiseSettings& noise, std::uint64_t noise_seed,
                             const std::string& phase);

struct OversampleOutcome {
  MultiViewDataset augmented;
  std::vector<PseudoSample> pseudo;
  std::vector<int> pseudo_counts_per_class;
  std::vector<std::string> warnings;
};

// Balances every class below the target count using the model's evidences.
// Classes that cannot be balanced are skipped with a warning.
OversampleOutcome run_oversample(const MultiViewDataset& train_norm, const TrainedModel& model,
                                 const ExperimentConfig& cfg);

// Full two-phase run on an in-memory dataset. Ablation v1-no-oversample stops
// after phase 1; v2-random-weights swaps the neighbor weighting for random
// simplex draws.
struct PipelineOutcome {
  PreparedData prepared;
  TrainedModel phase1_model;
  MetricsReport phase1_report;
  std::optional<TrainedModel> phase2_model;
  std::optional<MetricsReport> phase2_report;
  std::vector<PseudoSample> pseudo;

  const TrainedModel& final_model() const { return phase2_model ? *phase2_model : phase1_model; }
  const MetricsReport& final_report() const {
    return phase2_report ? *phase2_report : phase1_report;
  }
};

PipelineOutcome run_pipeline(const MultiViewDataset& raw, const ExperimentConfig& cfg);

ModelCheckpoint make_checkpoint(const TrainedModel& model, const std::string& dataset_name,
                                const std::vector<int>& view_dims, const ExperimentConfig& cfg);
TrainedModel model_from_checkpoint(const ModelCheckpoint& checkpoint);

// Phase-1 command: prepare data, train, score on the test split.
struct TrainOutcome {
  TrainedModel model;
  MetricsReport report;
  std::string dataset_name;
  std::vector<int> view_dims;
};

TrainOutcome cmd_train(const ExperimentConfig& cfg);

// Phase-2 command: oversample with the phase-1 model's evidences, retrain
// (fresh init unless cfg.retrain_warm_start), score. The phase-1 model is
// rescored on the same test set so both phases land in one report.
struct RetrainOutcome {
  TrainedModel model;
  MetricsReport phase1_report;
  MetricsReport report;
  std::vector<PseudoSample> pseudo;
  std::string dataset_name;
  std::vector<int> view_dims;
};

RetrainOutcome cmd_oversample_retrain(const ExperimentConfig& cfg,
                                      const ModelCheckpoint& phase1);

// Scores a checkpoint on an explicit dataset (raw features; the checkpoint's
// normalization is applied) under the given noise settings.
MetricsReport cmd_evaluate(const ModelCheckpoint& checkpoint, const MultiViewDataset& raw_eval,
                           const NoiseSettings& noise, std::uint64_t seed);

struct SweepRow {
  double value = 0.0;
  bool failed = false;
  std::string error;
  MetricsReport phase1_report;
  std::optional<MetricsReport> phase2_report;

  const MetricsReport& final_report() const {
    return phase2_report ? *phase2_report : phase1_report;
  }
};

struct SweepOutcome {
  std::string parameter;
  std::vector<SweepRow> rows;
  std::vector<std::string> notices;
};

// parameter is "R" or "eta". Every run shares the base config and master
// seed; duplicates are dropped with a notice, per-run failures are recorded
// and the sweep continues. eta <= 0 is clamped to 1e-6 with a warning.
SweepOutcome cmd_sweep(const ExperimentConfig& base, const std::string& parameter,
                       const std::vector<double>& values);

// Writes one line per sample: K joint-evidence values, the label, and the
// joint uncertainty, space-delimited.
void cmd_dump_evidence(const ModelCheckpoint& checkpoint, const MultiViewDataset& raw,
                       const std::string& out_path);

// Aligned sweep table for stdout.
std::string format_sweep_table(const SweepOutcome& sweep);

nlohmann::json sweep_document(const SweepOutcome& sweep, const ExperimentConfig& base,
                              double wall_clock_seconds);

}  // namespace mvlt
