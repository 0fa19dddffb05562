#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mvlt {

// N x dim feature matrix, row-major.
struct ViewMatrix {
  int dim = 0;
  std::vector<double> values;

  int rows() const { return dim == 0 ? 0 : static_cast<int>(values.size()) / dim; }
  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> row(int i) {
    return {values.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
};

// Per-view per-feature z-score statistics.
struct NormalizationStats {
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> stds;
};

struct MultiViewDataset {
  std::string name;
  int num_classes = 0;
  std::vector<ViewMatrix> views;
  std::vector<int> labels;
  // Stats the stored features were fit with, when the manifest carries them.
  std::optional<NormalizationStats> normalization;

  int num_views() const { return static_cast<int>(views.size()); }
  int size() const { return static_cast<int>(labels.size()); }
  std::vector<int> view_dims() const;
  std::vector<int> class_counts() const;
  std::vector<std::vector<int>> indices_by_class() const;
};

// Throws DataError on any shape/range/finiteness violation.
void validate_dataset(const MultiViewDataset& data);

// Manifest is a JSON file naming the per-view matrix files and label file;
// paths are resolved relative to the manifest's directory.
MultiViewDataset load_dataset(const std::string& manifest_path);

// Writes <name>.manifest.json plus the matrix/label files into dir.
// Values round-trip bit-exactly through load_dataset.
std::string save_dataset(const MultiViewDataset& data, const std::string& dir);

NormalizationStats fit_normalization(const MultiViewDataset& data);
MultiViewDataset apply_normalization(const MultiViewDataset& data, const NormalizationStats& stats);

struct SplitResult {
  MultiViewDataset train;
  MultiViewDataset test;
};

// Stratified per class; deterministic for a fixed seed.
SplitResult split(const MultiViewDataset& data, double train_fraction, std::uint64_t seed);

enum class DecayForm { normalized_exponent, geometric_per_class };

DecayForm decay_form_from_string(const std::string& s);
std::string to_string(DecayForm form);

struct LongTailConfig {
  double eta = 0.3;
  DecayForm decay_form = DecayForm::normalized_exponent;
  std::uint64_t seed = 0;
  // Keep at least 2 samples per class even when the coin flips remove more.
  bool force_min_survivors = true;
};

// Retention probability for class k; nonincreasing in k, 1 at k = 0.
double retention_probability(const LongTailConfig& cfg, int k, int num_classes);

struct LongTailResult {
  MultiViewDataset data;
  std::vector<std::string> warnings;
};

LongTailResult make_long_tailed(const MultiViewDataset& train, const LongTailConfig& cfg);

// Adds N(0, sigma^2) noise to every feature. Meant for normalized features.
MultiViewDataset inject_gaussian(const MultiViewDataset& test, double sigma, std::uint64_t seed);

// Replaces one uniformly chosen view of floor(fraction * N) samples with the
// same view of a different-class sample; labels unchanged.
MultiViewDataset inject_conflictive(const MultiViewDataset& test, double fraction,
                                    std::uint64_t seed);

// Per-class Gaussian blobs with unit within-class deviation; per-view class
// means are scaled so the minimum pairwise distance equals separation.
// dims may be empty (every view gets dimension 8).
MultiViewDataset make_synthetic_fixture(int num_classes, int num_views,
                                        const std::vector<int>& per_class_counts,
                                        double separation, std::uint64_t seed,
                                        std::vector<int> dims = {});

}  // namespace mvlt
