#pragma once

#include <string>
#include <vector>

#include "mvlt/dataset.hpp"
#include "mvlt/network.hpp"

namespace mvlt {

// Serialized trained model plus everything evaluation needs: the fitted
// normalization, training class counts (for the head/medium/tail split),
// base rates, and the identity of the dataset it was trained on.
struct ModelCheckpoint {
  int schema_version = 1;
  std::string dataset_name;
  int num_classes = 0;
  std::vector<int> view_dims;
  std::vector<ViewNetwork> nets;
  NormalizationStats normalization;
  std::vector<int> train_class_counts;
  std::vector<double> base_rates;
  std::string config_hash;
};

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::string& path);

ModelCheckpoint load_checkpoint(const std::string& path);

// Throws DataError when the dataset's shape does not match the checkpoint.
void check_compatible(const ModelCheckpoint& checkpoint, const MultiViewDataset& data);

}  // namespace mvlt
