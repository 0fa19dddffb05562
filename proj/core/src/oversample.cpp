#include "mvlt/oversample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mvlt {

double evidence_distance(const Evidence& a, const Evidence& b) {
  if (a.k() != b.k()) throw std::invalid_argument("evidence vectors have different class counts");
  double sq = 0.0;
  for (int i = 0; i < a.k(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

NeighborSet find_neighbors(int center, const std::vector<int>& class_pool,
                           const std::vector<Evidence>& joint_evidences, int r) {
  if (r < 1) throw std::invalid_argument("neighbor count must be >= 1");
  bool center_in_pool = false;
  for (int id : class_pool) {
    if (id == center) {
      center_in_pool = true;
      break;
    }
  }
  if (!center_in_pool) throw std::invalid_argument("center is not in the class pool");
  if (r > static_cast<int>(class_pool.size()) - 1) {
    throw std::invalid_argument("not enough class-mates for " + std::to_string(r) + " neighbors");
  }

  const Evidence& center_e = joint_evidences.at(static_cast<std::size_t>(center));
  std::vector<std::pair<double, int>> by_distance;
  by_distance.reserve(class_pool.size() - 1);
  for (int id : class_pool) {
    if (id == center) continue;
    by_distance.emplace_back(
        evidence_distance(center_e, joint_evidences.at(static_cast<std::size_t>(id))), id);
  }
  // Ties break toward the lower sample id.
  std::sort(by_distance.begin(), by_distance.end());

  NeighborSet out;
  out.center_index = center;
  out.neighbor_indices.reserve(static_cast<std::size_t>(r));
  out.distances.reserve(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    out.distances.push_back(by_distance[static_cast<std::size_t>(i)].first);
    out.neighbor_indices.push_back(by_distance[static_cast<std::size_t>(i)].second);
  }
  return out;
}

Evidence integrate_evidence(const Evidence& e_c, const Evidence& e_r) {
  if (e_c.k() != e_r.k()) throw std::invalid_argument("evidence vectors have different class counts");
  std::vector<double> mixed(static_cast<std::size_t>(e_c.k()));
  for (int i = 0; i < e_c.k(); ++i) mixed[static_cast<std::size_t>(i)] = 0.5 * e_c[i] + 0.5 * e_r[i];
  return Evidence(std::move(mixed));
}

double uncertainty_entropy(const Opinion& o, const std::vector<double>& y) {
  if (static_cast<int>(y.size()) != o.k()) {
    throw std::invalid_argument("label length differs from opinion");
  }
  int true_class = -1;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0) {
      if (true_class >= 0) throw std::invalid_argument("label vector must be one-hot");
      true_class = static_cast<int>(i);
    } else if (y[i] != 0.0) {
      throw std::invalid_argument("label vector must be one-hot");
    }
  }
  if (true_class < 0) throw std::invalid_argument("label vector must have exactly one 1");

  const double u = o.uncertainty();
  const double projected = o.beliefs()[static_cast<std::size_t>(true_class)] +
                           u * o.base_rates()[static_cast<std::size_t>(true_class)];
  if (projected <= 0.0) {
    throw std::invalid_argument("true-class projection is not positive");
  }
  return -std::exp(u) * std::log(projected);
}

double inverse_transform(double x) { return 1.0 / x; }

namespace {

constexpr double kEntropyFloor = 1e-8;

double transformed_entropy(const Evidence& e, const std::vector<double>& y,
                           const std::vector<double>& base_rates, WeightTransform transform) {
  const double h = uncertainty_entropy(opinion_from_evidence(e, base_rates), y);
  return transform(std::max(h, kEntropyFloor));
}

}  // namespace

NeighborWeights neighbor_weights(int center, const NeighborSet& neighbors,
                                 const EvidenceTable& evidences, int view,
                                 const std::vector<double>& y,
                                 const std::vector<double>& base_rates,
                                 WeightTransform transform) {
  if (neighbors.center_index != center) {
    throw std::invalid_argument("neighbor set belongs to a different center");
  }
  if (view < 0 || view >= static_cast<int>(evidences.per_view.size())) {
    throw std::invalid_argument("view id out of range");
  }
  const auto& view_evidences = evidences.per_view[static_cast<std::size_t>(view)];
  const Evidence& center_e = view_evidences.at(static_cast<std::size_t>(center));

  NeighborWeights out;
  out.weights.reserve(neighbors.neighbor_indices.size() + 1);
  double total = transformed_entropy(center_e, y, base_rates, transform);
  out.weights.push_back(total);
  for (int id : neighbors.neighbor_indices) {
    const double f = transformed_entropy(
        integrate_evidence(center_e, view_evidences.at(static_cast<std::size_t>(id))), y,
        base_rates, transform);
    out.weights.push_back(f);
    total += f;
  }
  for (double& w : out.weights) w /= total;
  return out;
}

NeighborWeights random_weights_ablation(int r, Rng& stream) {
  if (r < 1) throw std::invalid_argument("neighbor count must be >= 1");
  NeighborWeights out;
  out.weights.resize(static_cast<std::size_t>(r) + 1);
  double total = 0.0;
  do {
    total = 0.0;
    for (double& w : out.weights) {
      w = stream.uniform01();
      total += w;
    }
  } while (total < 1e-12);
  for (double& w : out.weights) w /= total;
  return out;
}

NeighborWeights random_weights_ablation(int r, std::uint64_t seed) {
  Rng stream(seed);
  return random_weights_ablation(r, stream);
}

PseudoSample synthesize(int center, const NeighborSet& neighbors,
                        const std::vector<NeighborWeights>& weights_per_view,
                        const MultiViewDataset& data) {
  if (neighbors.center_index != center) {
    throw std::invalid_argument("neighbor set belongs to a different center");
  }
  if (static_cast<int>(weights_per_view.size()) != data.num_views()) {
    throw std::invalid_argument("one weight vector per view required");
  }
  const std::size_t r = neighbors.neighbor_indices.size();
  PseudoSample out;
  out.label = data.labels.at(static_cast<std::size_t>(center));
  out.provenance.center = center;
  out.provenance.neighbors = neighbors.neighbor_indices;
  out.per_view_features.resize(static_cast<std::size_t>(data.num_views()));

  for (int v = 0; v < data.num_views(); ++v) {
    const NeighborWeights& weights = weights_per_view[static_cast<std::size_t>(v)];
    if (weights.weights.size() != r + 1) {
      throw std::invalid_argument("weight vector length must be R+1");
    }
    double sum = 0.0;
    for (double w : weights.weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("weights must be >= 0");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");

    const ViewMatrix& m = data.views[static_cast<std::size_t>(v)];
    std::vector<double> feature(static_cast<std::size_t>(m.dim), 0.0);
    auto add_scaled = [&feature, &m](int id, double w) {
      auto row = m.row(id);
      for (std::size_t j = 0; j < feature.size(); ++j) feature[j] += w * row[j];
    };
    add_scaled(center, weights.weights[0]);
    for (std::size_t i = 0; i < r; ++i) {
      add_scaled(neighbors.neighbor_indices[i], weights.weights[i + 1]);
    }
    out.per_view_features[static_cast<std::size_t>(v)] = std::move(feature);
    out.provenance.weights_per_view.push_back(weights.weights);
  }
  return out;
}

BalanceOutcome balance_class(const MultiViewDataset& data, int class_k, int target_count,
                             const EvidenceTable& evidences, int r, WeightMode mode,
                             const std::vector<double>& base_rates, Rng stream,
                             WeightTransform transform) {
  if (class_k < 0 || class_k >= data.num_classes) {
    throw std::invalid_argument("class id out of range");
  }
  const auto by_class = data.indices_by_class();
  const std::vector<int>& pool = by_class[static_cast<std::size_t>(class_k)];
  if (static_cast<int>(pool.size()) < 2) {
    throw UnbalanceableClassError("class " + std::to_string(class_k) + " has " +
                                  std::to_string(pool.size()) + " samples, cannot oversample");
  }
  if (target_count < static_cast<int>(pool.size())) {
    throw std::invalid_argument("target count below current class count");
  }

  BalanceOutcome out;
  out.effective_r = std::min(r, static_cast<int>(pool.size()) - 1);
  out.r_reduced = out.effective_r < r;

  std::vector<double> y(static_cast<std::size_t>(data.num_classes), 0.0);
  y[static_cast<std::size_t>(class_k)] = 1.0;

  const int needed = target_count - static_cast<int>(pool.size());
  out.samples.reserve(static_cast<std::size_t>(needed));
  for (int made = 0; made < needed; ++made) {
    const int center = pool[static_cast<std::size_t>(stream.uniform_int(static_cast<int>(pool.size())))];
    const NeighborSet neighbors = find_neighbors(center, pool, evidences.joint, out.effective_r);
    std::vector<NeighborWeights> weights_per_view;
    weights_per_view.reserve(static_cast<std::size_t>(data.num_views()));
    for (int v = 0; v < data.num_views(); ++v) {
      if (mode == WeightMode::random) {
        weights_per_view.push_back(random_weights_ablation(out.effective_r, stream));
      } else {
        weights_per_view.push_back(
            neighbor_weights(center, neighbors, evidences, v, y, base_rates, transform));
      }
    }
    out.samples.push_back(synthesize(center, neighbors, weights_per_view, data));
  }
  return out;
}

MultiViewDataset append_pseudo_samples(const MultiViewDataset& data,
                                       const std::vector<PseudoSample>& samples) {
  MultiViewDataset out = data;
  for (const PseudoSample& s : samples) {
    if (static_cast<int>(s.per_view_features.size()) != data.num_views()) {
      throw std::invalid_argument("pseudo-sample view count differs from dataset");
    }
    for (int v = 0; v < data.num_views(); ++v) {
      const auto& feature = s.per_view_features[static_cast<std::size_t>(v)];
      if (static_cast<int>(feature.size()) != data.views[static_cast<std::size_t>(v)].dim) {
        throw std::invalid_argument("pseudo-sample width differs from view");
      }
      out.views[static_cast<std::size_t>(v)].values.insert(
          out.views[static_cast<std::size_t>(v)].values.end(), feature.begin(), feature.end());
    }
    out.labels.push_back(s.label);
  }
  return out;
}

}  // namespace mvlt
