#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mvlt/config.hpp"

namespace mvlt {

// Reporting partition: classes sorted by descending training count, the
// largest min(3,K) are head, the next min(5, K-head) medium, the rest tail.
struct HeadMediumTail {
  std::vector<int> head;
  std::vector<int> medium;
  std::vector<int> tail;
};

HeadMediumTail head_medium_tail(const std::vector<int>& train_class_counts);

struct MetricsReport {
  std::string phase;  // "train", "retrained", or "evaluate"
  double overall_accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  double head_accuracy = 0.0;
  double medium_accuracy = 0.0;
  double tail_accuracy = 0.0;
  HeadMediumTail partition;
  double mean_uncertainty = 0.0;
  double median_uncertainty = 0.0;
  std::vector<int> uncertainty_histogram;  // 50 bins on [0,1]
  std::vector<double> loss_history;
  std::vector<int> pseudo_counts_per_class;
  std::vector<std::string> warnings;
};

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kUncertaintyBins = 50;

nlohmann::json metrics_to_json(const MetricsReport& report);

// Full report document: schema version, resolved config, metric payload, and
// wall clock (the only field allowed to differ between identical runs).
nlohmann::json report_document(const MetricsReport& report, const ExperimentConfig& cfg,
                               double wall_clock_seconds);

void write_report(const nlohmann::json& document, const std::string& path);

// Aligned table for stdout.
std::string format_report_table(const MetricsReport& report);

}  // namespace mvlt
