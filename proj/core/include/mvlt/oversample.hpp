#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mvlt/dataset.hpp"
#include "mvlt/opinion.hpp"
#include "mvlt/rng.hpp"

namespace mvlt {

// Evidence for every training sample, keyed two ways on purpose: neighbor
// search runs on the joint evidence, entropy weighting on per-view evidence.
struct EvidenceTable {
  std::vector<std::vector<Evidence>> per_view;  // [view][sample id]
  std::vector<Evidence> joint;                  // [sample id]
};

// A class with fewer than 2 real samples cannot be oversampled.
struct UnbalanceableClassError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Center plus its R nearest class-mates by joint-evidence distance.
struct NeighborSet {
  int center_index = -1;
  std::vector<int> neighbor_indices;  // ascending distance, ties by ascending id
  std::vector<double> distances;
};

// R+1 convex weights; slot 0 belongs to the center.
struct NeighborWeights {
  std::vector<double> weights;
};

struct PseudoProvenance {
  int center = -1;
  std::vector<int> neighbors;
  std::vector<std::vector<double>> weights_per_view;
};

struct PseudoSample {
  std::vector<std::vector<double>> per_view_features;
  int label = -1;
  PseudoProvenance provenance;
};

// Euclidean norm of the evidence difference.
double evidence_distance(const Evidence& a, const Evidence& b);

NeighborSet find_neighbors(int center, const std::vector<int>& class_pool,
                           const std::vector<Evidence>& joint_evidences, int r);

// (e_c + e_r) / 2
Evidence integrate_evidence(const Evidence& e_c, const Evidence& e_r);

// H = -exp(u) * sum_k y_k log(b_k + u a_k). Requires the true-class
// projection to be positive.
double uncertainty_entropy(const Opinion& o, const std::vector<double>& y);

using WeightTransform = double (*)(double);

// F(x) = 1/x, the monotonically decreasing transform used for weighting.
double inverse_transform(double x);

// Weights proportional to F(H) on one view; the center's slot uses its raw
// evidence, neighbor slots use the integrated evidence. H is floored at 1e-8
// before the transform.
NeighborWeights neighbor_weights(int center, const NeighborSet& neighbors,
                                 const EvidenceTable& evidences, int view,
                                 const std::vector<double>& y,
                                 const std::vector<double>& base_rates,
                                 WeightTransform transform = inverse_transform);

// R+1 weights uniform on the simplex (normalized i.i.d. uniforms).
NeighborWeights random_weights_ablation(int r, Rng& stream);
NeighborWeights random_weights_ablation(int r, std::uint64_t seed);

PseudoSample synthesize(int center, const NeighborSet& neighbors,
                        const std::vector<NeighborWeights>& weights_per_view,
                        const MultiViewDataset& data);

enum class WeightMode { uncertainty, random };

struct BalanceOutcome {
  std::vector<PseudoSample> samples;
  int effective_r = 0;
  bool r_reduced = false;
};

// Generates pseudo-samples for class k until it reaches target_count.
// Centers and neighbors are always real samples. The stream should be derived
// from the master seed and the class id so classes stay independent.
BalanceOutcome balance_class(const MultiViewDataset& data, int class_k, int target_count,
                             const EvidenceTable& evidences, int r, WeightMode mode,
                             const std::vector<double>& base_rates, Rng stream,
                             WeightTransform transform = inverse_transform);

// Appends pseudo-samples as real rows; used to build the augmented train set.
MultiViewDataset append_pseudo_samples(const MultiViewDataset& data,
                                       const std::vector<PseudoSample>& samples);

}  // namespace mvlt
