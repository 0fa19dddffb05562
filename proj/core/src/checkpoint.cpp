#include "mvlt/checkpoint.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mvlt/errors.hpp"

using nlohmann::json;

namespace mvlt {

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::string& path) {
  json j;
  j["schema_version"] = checkpoint.schema_version;
  j["dataset_name"] = checkpoint.dataset_name;
  j["K"] = checkpoint.num_classes;
  j["view_dims"] = checkpoint.view_dims;
  j["train_class_counts"] = checkpoint.train_class_counts;
  j["base_rates"] = checkpoint.base_rates;
  j["config_hash"] = checkpoint.config_hash;
  j["normalization"] = {{"means", checkpoint.normalization.means},
                        {"stds", checkpoint.normalization.stds}};
  j["networks"] = json::array();
  for (const ViewNetwork& net : checkpoint.nets) {
    j["networks"].push_back({{"view_id", net.view_id},
                             {"input_dim", net.input_dim},
                             {"hidden_dim", net.hidden_dim},
                             {"num_classes", net.num_classes},
                             {"w1", net.w1},
                             {"b1", net.b1},
                             {"w2", net.w2},
                             {"b2", net.b2}});
  }
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out << j.dump() << '\n';
}

ModelCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + path + ": " + e.what());
  }

  ModelCheckpoint checkpoint;
  try {
    checkpoint.schema_version = j.at("schema_version").get<int>();
    if (checkpoint.schema_version != 1) {
      throw DataError("checkpoint " + path + ": unsupported schema version " +
                      std::to_string(checkpoint.schema_version));
    }
    checkpoint.dataset_name = j.at("dataset_name").get<std::string>();
    checkpoint.num_classes = j.at("K").get<int>();
    checkpoint.view_dims = j.at("view_dims").get<std::vector<int>>();
    checkpoint.train_class_counts = j.at("train_class_counts").get<std::vector<int>>();
    checkpoint.base_rates = j.at("base_rates").get<std::vector<double>>();
    checkpoint.config_hash = j.at("config_hash").get<std::string>();
    checkpoint.normalization.means =
        j.at("normalization").at("means").get<std::vector<std::vector<double>>>();
    checkpoint.normalization.stds =
        j.at("normalization").at("stds").get<std::vector<std::vector<double>>>();
    for (const json& n : j.at("networks")) {
      ViewNetwork net;
      net.view_id = n.at("view_id").get<int>();
      net.input_dim = n.at("input_dim").get<int>();
      net.hidden_dim = n.at("hidden_dim").get<int>();
      net.num_classes = n.at("num_classes").get<int>();
      net.w1 = n.at("w1").get<std::vector<double>>();
      net.b1 = n.at("b1").get<std::vector<double>>();
      net.w2 = n.at("w2").get<std::vector<double>>();
      net.b2 = n.at("b2").get<std::vector<double>>();
      if (net.w1.size() != static_cast<std::size_t>(net.hidden_dim) * net.input_dim ||
          net.b1.size() != static_cast<std::size_t>(net.hidden_dim) ||
          net.w2.size() != static_cast<std::size_t>(net.num_classes) * net.hidden_dim ||
          net.b2.size() != static_cast<std::size_t>(net.num_classes)) {
        throw DataError("checkpoint " + path + ": parameter shapes do not match view " +
                        std::to_string(net.view_id));
      }
      checkpoint.nets.push_back(std::move(net));
    }
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + path + ": " + e.what());
  }
  if (checkpoint.nets.empty()) throw DataError("checkpoint " + path + ": no networks");
  if (checkpoint.view_dims.size() != checkpoint.nets.size()) {
    throw DataError("checkpoint " + path + ": view_dims does not match network count");
  }
  return checkpoint;
}

void check_compatible(const ModelCheckpoint& checkpoint, const MultiViewDataset& data) {
  if (data.num_classes != checkpoint.num_classes) {
    throw DataError("dataset has " + std::to_string(data.num_classes) +
                    " classes, checkpoint expects " + std::to_string(checkpoint.num_classes));
  }
  if (data.num_views() != static_cast<int>(checkpoint.nets.size())) {
    throw DataError("dataset has " + std::to_string(data.num_views()) +
                    " views, checkpoint expects " + std::to_string(checkpoint.nets.size()));
  }
  for (int v = 0; v < data.num_views(); ++v) {
    if (data.views[static_cast<std::size_t>(v)].dim !=
        checkpoint.view_dims[static_cast<std::size_t>(v)]) {
      throw DataError("view " + std::to_string(v) + " is " +
                      std::to_string(data.views[static_cast<std::size_t>(v)].dim) +
                      " wide, checkpoint expects " +
                      std::to_string(checkpoint.view_dims[static_cast<std::size_t>(v)]));
    }
  }
}

}  // namespace mvlt
