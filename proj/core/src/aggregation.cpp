#include "mvlt/aggregation.hpp"

#include <cmath>
#include <stdexcept>

namespace mvlt {
namespace {

void check_same_shape(const Opinion& a, const Opinion& b) {
  if (a.k() != b.k()) {
    throw std::invalid_argument("opinions have different class counts");
  }
  for (int i = 0; i < a.k(); ++i) {
    if (std::abs(a.base_rates()[static_cast<std::size_t>(i)] -
                 b.base_rates()[static_cast<std::size_t>(i)]) > 1e-12) {
      throw std::invalid_argument("opinions have different base rates");
    }
  }
}

}  // namespace

AggregationWeights fold_weights(int group_count) {
  if (group_count < 1) throw std::invalid_argument("group count must be >= 1");
  const double v = static_cast<double>(group_count) + 1.0;
  return {static_cast<double>(group_count) / v, 1.0 / v};
}

Evidence fuse_pair_evidence(const Evidence& group_e, int group_count, const Evidence& individual_e) {
  if (group_e.k() != individual_e.k()) {
    throw std::invalid_argument("evidence vectors have different class counts");
  }
  const AggregationWeights w = fold_weights(group_count);
  std::vector<double> fused(static_cast<std::size_t>(group_e.k()));
  for (int i = 0; i < group_e.k(); ++i) {
    fused[static_cast<std::size_t>(i)] =
        w.group_weight * group_e[i] + w.individual_weight * individual_e[i];
  }
  return Evidence(std::move(fused));
}

Opinion fuse_pair_opinion(const Opinion& group_o, int group_count, const Opinion& individual_o) {
  check_same_shape(group_o, individual_o);
  const double ug = group_o.uncertainty();
  const double ui = individual_o.uncertainty();
  if (ug <= 0.0 || ui <= 0.0) {
    throw std::invalid_argument("cannot fuse a degenerate opinion with zero uncertainty");
  }
  const AggregationWeights w = fold_weights(group_count);
  const double denom = w.individual_weight * ug + w.group_weight * ui;
  std::vector<double> beliefs(static_cast<std::size_t>(group_o.k()));
  double sum = 0.0;
  for (int i = 0; i < group_o.k(); ++i) {
    double b = (w.group_weight * group_o.beliefs()[static_cast<std::size_t>(i)] * ui +
                w.individual_weight * individual_o.beliefs()[static_cast<std::size_t>(i)] * ug) /
               denom;
    beliefs[static_cast<std::size_t>(i)] = b;
    sum += b;
  }
  double u = ug * ui / denom;
  // The closed form sums to 1 exactly in real arithmetic; absorb roundoff so
  // construction never trips the simplex check.
  u += 1.0 - (sum + u);
  return Opinion(std::move(beliefs), u, group_o.base_rates());
}

std::pair<Opinion, JointOpinionTrace> aggregate_views(const std::vector<Opinion>& opinions) {
  if (opinions.empty()) {
    throw std::invalid_argument("cannot aggregate zero views");
  }
  for (std::size_t v = 1; v < opinions.size(); ++v) {
    check_same_shape(opinions[0], opinions[v]);
  }
  const int k = opinions[0].k();
  JointOpinionTrace trace;
  trace.per_step.reserve(opinions.size());

  std::vector<double> running(static_cast<std::size_t>(k), 0.0);
  Opinion joint = opinions[0];
  for (std::size_t v = 0; v < opinions.size(); ++v) {
    const Evidence ev = evidence_from_opinion(opinions[v], k);
    for (int i = 0; i < k; ++i) {
      // Running mean keeps every step equal to the fold's intermediate.
      running[static_cast<std::size_t>(i)] +=
          (ev[i] - running[static_cast<std::size_t>(i)]) / (static_cast<double>(v) + 1.0);
    }
    Evidence step_e{std::vector<double>(running)};
    // Step 1 is the first view unchanged.
    joint = v == 0 ? opinions[0] : opinion_from_evidence(step_e, opinions[0].base_rates());
    trace.per_step.push_back({static_cast<int>(v) + 1, joint, std::move(step_e)});
  }
  return {joint, std::move(trace)};
}

Evidence joint_evidence(const std::vector<Opinion>& opinions) {
  auto [joint, trace] = aggregate_views(opinions);
  return trace.per_step.back().evidence;
}

Evidence mean_evidence(const std::vector<Evidence>& evidences) {
  if (evidences.empty()) {
    throw std::invalid_argument("cannot average zero evidence vectors");
  }
  const int k = evidences[0].k();
  std::vector<double> mean(static_cast<std::size_t>(k), 0.0);
  for (const Evidence& e : evidences) {
    if (e.k() != k) throw std::invalid_argument("evidence vectors have different class counts");
    for (int i = 0; i < k; ++i) mean[static_cast<std::size_t>(i)] += e[i];
  }
  for (double& m : mean) m /= static_cast<double>(evidences.size());
  return Evidence(std::move(mean));
}

}  // namespace mvlt
