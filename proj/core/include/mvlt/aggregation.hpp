#pragma once

#include <utility>
#include <vector>

#include "mvlt/opinion.hpp"

namespace mvlt {

// Weights for folding one more view into a group of group_count accumulated
// views: group gets (V-1)/V, the newcomer 1/V, with V = group_count + 1.
struct AggregationWeights {
  double group_weight;
  double individual_weight;
};

AggregationWeights fold_weights(int group_count);

// Intermediates of the sequential fold; step v holds the aggregate of the
// first v views. Step 1 is the first view unchanged.
struct AggregationStep {
  int step;
  Opinion opinion;
  Evidence evidence;
};

struct JointOpinionTrace {
  std::vector<AggregationStep> per_step;
};

Evidence fuse_pair_evidence(const Evidence& group_e, int group_count, const Evidence& individual_e);

// Closed-form fusion on the opinion simplex; equivalent to the evidence-space
// rule, kept as an independently testable path. Requires both u > 0.
Opinion fuse_pair_opinion(const Opinion& group_o, int group_count, const Opinion& individual_o);

// Sequential left fold over the views. V = 1 is identity. Implemented in
// evidence space (running mean) for numerical robustness.
std::pair<Opinion, JointOpinionTrace> aggregate_views(const std::vector<Opinion>& opinions);

// Evidence of the joint opinion; equals the arithmetic mean of the per-view
// evidences.
Evidence joint_evidence(const std::vector<Opinion>& opinions);

Evidence mean_evidence(const std::vector<Evidence>& evidences);

}  // namespace mvlt
