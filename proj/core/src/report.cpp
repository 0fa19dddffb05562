#include "mvlt/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mvlt/errors.hpp"

using nlohmann::json;

namespace mvlt {

HeadMediumTail head_medium_tail(const std::vector<int>& train_class_counts) {
  const int k = static_cast<int>(train_class_counts.size());
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  // Descending count; equal counts keep ascending class id.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return train_class_counts[static_cast<std::size_t>(a)] >
           train_class_counts[static_cast<std::size_t>(b)];
  });
  HeadMediumTail out;
  const int head = std::min(3, k);
  const int medium = std::min(5, k - head);
  for (int i = 0; i < k; ++i) {
    if (i < head) {
      out.head.push_back(order[static_cast<std::size_t>(i)]);
    } else if (i < head + medium) {
      out.medium.push_back(order[static_cast<std::size_t>(i)]);
    } else {
      out.tail.push_back(order[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

json metrics_to_json(const MetricsReport& report) {
  json j;
  j["phase"] = report.phase;
  j["overall_accuracy"] = report.overall_accuracy;
  j["per_class_accuracy"] = report.per_class_accuracy;
  j["head_accuracy"] = report.head_accuracy;
  j["medium_accuracy"] = report.medium_accuracy;
  j["tail_accuracy"] = report.tail_accuracy;
  j["head_classes"] = report.partition.head;
  j["medium_classes"] = report.partition.medium;
  j["tail_classes"] = report.partition.tail;
  j["mean_uncertainty"] = report.mean_uncertainty;
  j["median_uncertainty"] = report.median_uncertainty;
  j["uncertainty_histogram"] = report.uncertainty_histogram;
  j["loss_history"] = report.loss_history;
  j["pseudo_counts_per_class"] = report.pseudo_counts_per_class;
  j["warnings"] = report.warnings;
  return j;
}

json report_document(const MetricsReport& report, const ExperimentConfig& cfg,
                     double wall_clock_seconds) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = config_to_json(cfg);
  j["metrics"] = metrics_to_json(report);
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

void write_report(const json& document, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw DataError("cannot write report " + path);
  out << document.dump(2) << '\n';
}

std::string format_report_table(const MetricsReport& report) {
  std::ostringstream out;
  char line[128];

  auto pct = [](double v) { return 100.0 * v; };
  std::snprintf(line, sizeof line, "%-22s %10s\n", "metric", "value");
  out << line;
  out << std::string(33, '-') << '\n';
  std::snprintf(line, sizeof line, "%-22s %9.2f%%\n", "overall accuracy",
                pct(report.overall_accuracy));
  out << line;
  std::snprintf(line, sizeof line, "%-22s %9.2f%%\n", "head accuracy", pct(report.head_accuracy));
  out << line;
  if (!report.partition.medium.empty()) {
    std::snprintf(line, sizeof line, "%-22s %9.2f%%\n", "medium accuracy",
                  pct(report.medium_accuracy));
    out << line;
  }
  if (!report.partition.tail.empty()) {
    std::snprintf(line, sizeof line, "%-22s %9.2f%%\n", "tail accuracy", pct(report.tail_accuracy));
    out << line;
  }
  std::snprintf(line, sizeof line, "%-22s %10.4f\n", "mean uncertainty", report.mean_uncertainty);
  out << line;
  std::snprintf(line, sizeof line, "%-22s %10.4f\n", "median uncertainty",
                report.median_uncertainty);
  out << line;
  const int pseudo_total =
      std::accumulate(report.pseudo_counts_per_class.begin(),
                      report.pseudo_counts_per_class.end(), 0);
  std::snprintf(line, sizeof line, "%-22s %10d\n", "pseudo-samples", pseudo_total);
  out << line;

  out << '\n';
  std::snprintf(line, sizeof line, "%-6s %10s %10s\n", "class", "accuracy", "group");
  out << line;
  out << std::string(28, '-') << '\n';
  auto group_of = [&report](int k) {
    for (int c : report.partition.head) {
      if (c == k) return "head";
    }
    for (int c : report.partition.medium) {
      if (c == k) return "medium";
    }
    return "tail";
  };
  for (std::size_t k = 0; k < report.per_class_accuracy.size(); ++k) {
    std::snprintf(line, sizeof line, "%-6zu %9.2f%% %10s\n", k, pct(report.per_class_accuracy[k]),
                  group_of(static_cast<int>(k)));
    out << line;
  }
  return out.str();
}

}  // namespace mvlt
