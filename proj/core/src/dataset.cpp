#include "mvlt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mvlt/errors.hpp"
#include "mvlt/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mvlt {
namespace {

// Enough digits to round-trip a double exactly.
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_row(const std::string& line, const std::string& file, int row) {
  std::vector<double> out;
  std::string token;
  std::istringstream ss(line);
  while (ss >> token) {
    // Tolerate comma-delimited matrices.
    if (!token.empty() && token.back() == ',') token.pop_back();
    if (token.empty()) continue;
    try {
      std::size_t used = 0;
      double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      out.push_back(v);
    } catch (const std::exception&) {
      throw DataError(file + " row " + std::to_string(row) + ": cannot parse '" + token + "'");
    }
  }
  return out;
}

ViewMatrix load_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file " + path.string());
  ViewMatrix m;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> values = parse_row(line, path.string(), row);
    if (m.dim == 0) {
      m.dim = static_cast<int>(values.size());
      if (m.dim == 0) throw DataError(path.string() + ": empty first row");
    } else if (static_cast<int>(values.size()) != m.dim) {
      throw DataError(path.string() + " row " + std::to_string(row) + ": expected " +
                      std::to_string(m.dim) + " columns, found " +
                      std::to_string(values.size()));
    }
    m.values.insert(m.values.end(), values.begin(), values.end());
    ++row;
  }
  return m;
}

std::vector<int> load_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file " + path.string());
  std::vector<int> labels;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      labels.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw DataError(path.string() + " row " + std::to_string(row) + ": cannot parse label");
    }
    ++row;
  }
  return labels;
}

MultiViewDataset subset(const MultiViewDataset& data, const std::vector<int>& ids) {
  MultiViewDataset out;
  out.name = data.name;
  out.num_classes = data.num_classes;
  out.normalization = data.normalization;
  out.views.resize(data.views.size());
  for (int v = 0; v < data.num_views(); ++v) {
    out.views[static_cast<std::size_t>(v)].dim = data.views[static_cast<std::size_t>(v)].dim;
    auto& values = out.views[static_cast<std::size_t>(v)].values;
    values.reserve(ids.size() * static_cast<std::size_t>(data.views[static_cast<std::size_t>(v)].dim));
    for (int id : ids) {
      auto row = data.views[static_cast<std::size_t>(v)].row(id);
      values.insert(values.end(), row.begin(), row.end());
    }
  }
  out.labels.reserve(ids.size());
  for (int id : ids) out.labels.push_back(data.labels[static_cast<std::size_t>(id)]);
  return out;
}

}  // namespace

std::vector<int> MultiViewDataset::view_dims() const {
  std::vector<int> dims;
  dims.reserve(views.size());
  for (const ViewMatrix& v : views) dims.push_back(v.dim);
  return dims;
}

std::vector<int> MultiViewDataset::class_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

std::vector<std::vector<int>> MultiViewDataset::indices_by_class() const {
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(num_classes));
  for (int i = 0; i < size(); ++i) {
    by_class[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);
  }
  return by_class;
}

void validate_dataset(const MultiViewDataset& data) {
  if (data.num_classes < 2) throw DataError(data.name + ": class count must be >= 2");
  if (data.views.empty()) throw DataError(data.name + ": no views");
  const int n = data.size();
  for (int v = 0; v < data.num_views(); ++v) {
    const ViewMatrix& m = data.views[static_cast<std::size_t>(v)];
    if (m.dim <= 0) throw DataError(data.name + ": view " + std::to_string(v) + " has no columns");
    if (m.rows() != n) {
      throw DataError(data.name + ": view " + std::to_string(v) + " has " +
                      std::to_string(m.rows()) + " rows, labels have " + std::to_string(n));
    }
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      if (!std::isfinite(m.values[i])) {
        throw DataError(data.name + ": view " + std::to_string(v) + " row " +
                        std::to_string(i / static_cast<std::size_t>(m.dim)) +
                        ": non-finite value");
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    const int label = data.labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= data.num_classes) {
      throw DataError(data.name + ": label row " + std::to_string(i) + ": class id " +
                      std::to_string(label) + " out of range [0," +
                      std::to_string(data.num_classes) + ")");
    }
  }
  if (data.normalization) {
    if (static_cast<int>(data.normalization->means.size()) != data.num_views() ||
        static_cast<int>(data.normalization->stds.size()) != data.num_views()) {
      throw DataError(data.name + ": normalization stats do not match view count");
    }
    for (int v = 0; v < data.num_views(); ++v) {
      if (static_cast<int>(data.normalization->means[static_cast<std::size_t>(v)].size()) !=
              data.views[static_cast<std::size_t>(v)].dim ||
          static_cast<int>(data.normalization->stds[static_cast<std::size_t>(v)].size()) !=
              data.views[static_cast<std::size_t>(v)].dim) {
        throw DataError(data.name + ": normalization stats do not match view " +
                        std::to_string(v) + " width");
      }
    }
  }
}

MultiViewDataset load_dataset(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest " + manifest_path);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError("manifest " + manifest_path + ": " + e.what());
  }

  MultiViewDataset data;
  const fs::path base = fs::path(manifest_path).parent_path();
  try {
    data.name = manifest.value("name", "dataset");
    data.num_classes = manifest.at("K").get<int>();
    for (const json& view : manifest.at("views")) {
      ViewMatrix m = load_matrix(base / view.at("path").get<std::string>());
      const int declared = view.at("dim").get<int>();
      if (m.dim != declared) {
        throw DataError(data.name + ": view file " + view.at("path").get<std::string>() +
                        " has " + std::to_string(m.dim) + " columns, manifest declares " +
                        std::to_string(declared));
      }
      data.views.push_back(std::move(m));
    }
    data.labels = load_labels(base / manifest.at("labels_path").get<std::string>());
    if (manifest.contains("normalization") && !manifest["normalization"].is_null()) {
      NormalizationStats stats;
      stats.means = manifest["normalization"].at("means").get<std::vector<std::vector<double>>>();
      stats.stds = manifest["normalization"].at("stds").get<std::vector<std::vector<double>>>();
      data.normalization = std::move(stats);
    }
  } catch (const json::exception& e) {
    throw DataError("manifest " + manifest_path + ": " + e.what());
  }
  validate_dataset(data);
  return data;
}

std::string save_dataset(const MultiViewDataset& data, const std::string& dir) {
  validate_dataset(data);
  fs::create_directories(dir);
  const fs::path base(dir);

  json manifest;
  manifest["name"] = data.name;
  manifest["K"] = data.num_classes;
  manifest["views"] = json::array();
  for (int v = 0; v < data.num_views(); ++v) {
    const std::string file = data.name + ".view" + std::to_string(v) + ".txt";
    std::ofstream out(base / file);
    if (!out) throw DataError("cannot write " + (base / file).string());
    const ViewMatrix& m = data.views[static_cast<std::size_t>(v)];
    for (int i = 0; i < m.rows(); ++i) {
      auto row = m.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out << ' ';
        out << format_double(row[j]);
      }
      out << '\n';
    }
    manifest["views"].push_back({{"path", file}, {"dim", m.dim}});
  }

  const std::string label_file = data.name + ".labels.txt";
  {
    std::ofstream out(base / label_file);
    if (!out) throw DataError("cannot write " + (base / label_file).string());
    for (int label : data.labels) out << label << '\n';
  }
  manifest["labels_path"] = label_file;
  if (data.normalization) {
    manifest["normalization"] = {{"means", data.normalization->means},
                                 {"stds", data.normalization->stds}};
  }

  const fs::path manifest_path = base / (data.name + ".manifest.json");
  std::ofstream out(manifest_path);
  if (!out) throw DataError("cannot write " + manifest_path.string());
  out << manifest.dump(2) << '\n';
  return manifest_path.string();
}

NormalizationStats fit_normalization(const MultiViewDataset& data) {
  validate_dataset(data);
  NormalizationStats stats;
  const double n = static_cast<double>(data.size());
  for (const ViewMatrix& m : data.views) {
    std::vector<double> mean(static_cast<std::size_t>(m.dim), 0.0);
    std::vector<double> sq(static_cast<std::size_t>(m.dim), 0.0);
    for (int i = 0; i < m.rows(); ++i) {
      auto row = m.row(i);
      for (int j = 0; j < m.dim; ++j) {
        mean[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j)];
        sq[static_cast<std::size_t>(j)] +=
            row[static_cast<std::size_t>(j)] * row[static_cast<std::size_t>(j)];
      }
    }
    std::vector<double> std_dev(static_cast<std::size_t>(m.dim));
    for (int j = 0; j < m.dim; ++j) {
      mean[static_cast<std::size_t>(j)] /= n;
      double var = sq[static_cast<std::size_t>(j)] / n -
                   mean[static_cast<std::size_t>(j)] * mean[static_cast<std::size_t>(j)];
      // Constant features pass through unscaled.
      std_dev[static_cast<std::size_t>(j)] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    stats.means.push_back(std::move(mean));
    stats.stds.push_back(std::move(std_dev));
  }
  return stats;
}

MultiViewDataset apply_normalization(const MultiViewDataset& data,
                                     const NormalizationStats& stats) {
  if (static_cast<int>(stats.means.size()) != data.num_views()) {
    throw DataError("normalization stats do not match view count");
  }
  MultiViewDataset out = data;
  for (int v = 0; v < out.num_views(); ++v) {
    ViewMatrix& m = out.views[static_cast<std::size_t>(v)];
    const auto& mean = stats.means[static_cast<std::size_t>(v)];
    const auto& std_dev = stats.stds[static_cast<std::size_t>(v)];
    if (static_cast<int>(mean.size()) != m.dim) {
      throw DataError("normalization stats do not match view " + std::to_string(v) + " width");
    }
    for (int i = 0; i < m.rows(); ++i) {
      auto row = m.row(i);
      for (int j = 0; j < m.dim; ++j) {
        row[static_cast<std::size_t>(j)] =
            (row[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)]) /
            std_dev[static_cast<std::size_t>(j)];
      }
    }
  }
  out.normalization = stats;
  return out;
}

SplitResult split(const MultiViewDataset& data, double train_fraction, std::uint64_t seed) {
  validate_dataset(data);
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must be in (0,1)");
  }
  Rng rng(seed);
  std::vector<int> train_ids;
  std::vector<int> test_ids;
  const auto by_class = data.indices_by_class();
  for (int k = 0; k < data.num_classes; ++k) {
    std::vector<int> ids = by_class[static_cast<std::size_t>(k)];
    if (ids.size() < 2) {
      throw DataError(data.name + ": class " + std::to_string(k) +
                      " has fewer than 2 samples, cannot split");
    }
    Rng stream = rng.derive(static_cast<std::uint64_t>(k));
    stream.shuffle(ids);
    int n_train = static_cast<int>(std::llround(train_fraction * static_cast<double>(ids.size())));
    n_train = std::clamp(n_train, 1, static_cast<int>(ids.size()) - 1);
    train_ids.insert(train_ids.end(), ids.begin(), ids.begin() + n_train);
    test_ids.insert(test_ids.end(), ids.begin() + n_train, ids.end());
  }
  std::sort(train_ids.begin(), train_ids.end());
  std::sort(test_ids.begin(), test_ids.end());
  SplitResult result{subset(data, train_ids), subset(data, test_ids)};
  result.train.name = data.name + ".train";
  result.test.name = data.name + ".test";
  return result;
}

DecayForm decay_form_from_string(const std::string& s) {
  if (s == "normalized-exponent") return DecayForm::normalized_exponent;
  if (s == "geometric-per-class") return DecayForm::geometric_per_class;
  throw ConfigError("unknown decay form '" + s + "'");
}

std::string to_string(DecayForm form) {
  return form == DecayForm::normalized_exponent ? "normalized-exponent" : "geometric-per-class";
}

double retention_probability(const LongTailConfig& cfg, int k, int num_classes) {
  if (!(cfg.eta > 0.0 && cfg.eta <= 1.0)) {
    throw std::invalid_argument("eta must be in (0,1]");
  }
  if (k < 0 || k >= num_classes) throw std::invalid_argument("class id out of range");
  if (num_classes < 2) throw std::invalid_argument("class count must be >= 2");
  if (cfg.decay_form == DecayForm::normalized_exponent) {
    return std::pow(cfg.eta, static_cast<double>(k) / static_cast<double>(num_classes - 1));
  }
  return std::pow(cfg.eta, static_cast<double>(k));
}

LongTailResult make_long_tailed(const MultiViewDataset& train, const LongTailConfig& cfg) {
  validate_dataset(train);
  LongTailResult result;
  if (cfg.eta == 1.0) {
    result.data = train;
    return result;
  }
  Rng rng(cfg.seed);
  const auto by_class = train.indices_by_class();
  std::vector<int> keep;
  for (int k = 0; k < train.num_classes; ++k) {
    const double p = retention_probability(cfg, k, train.num_classes);
    const auto& ids = by_class[static_cast<std::size_t>(k)];
    Rng stream = rng.derive(static_cast<std::uint64_t>(k));
    std::vector<int> kept;
    std::vector<int> dropped;
    for (int id : ids) {
      (stream.uniform01() < p ? kept : dropped).push_back(id);
    }
    if (kept.size() < 2) {
      if (cfg.force_min_survivors) {
        while (kept.size() < 2 && !dropped.empty()) {
          const int pick = stream.uniform_int(static_cast<int>(dropped.size()));
          kept.push_back(dropped[static_cast<std::size_t>(pick)]);
          dropped.erase(dropped.begin() + pick);
        }
        result.warnings.push_back("class " + std::to_string(k) +
                                  " nearly emptied by subsampling; forced " +
                                  std::to_string(kept.size()) + " survivors");
      } else {
        result.warnings.push_back("class " + std::to_string(k) + " left with " +
                                  std::to_string(kept.size()) + " samples after subsampling");
      }
    }
    keep.insert(keep.end(), kept.begin(), kept.end());
  }
  std::sort(keep.begin(), keep.end());
  result.data = subset(train, keep);
  return result;
}

MultiViewDataset inject_gaussian(const MultiViewDataset& test, double sigma, std::uint64_t seed) {
  validate_dataset(test);
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  MultiViewDataset out = test;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (int v = 0; v < out.num_views(); ++v) {
    Rng stream = rng.derive(static_cast<std::uint64_t>(v));
    for (double& value : out.views[static_cast<std::size_t>(v)].values) {
      value += sigma * stream.normal();
    }
  }
  return out;
}

MultiViewDataset inject_conflictive(const MultiViewDataset& test, double fraction,
                                    std::uint64_t seed) {
  validate_dataset(test);
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("fraction must be in [0,1]");
  }
  MultiViewDataset out = test;
  const int n = test.size();
  const int affected = static_cast<int>(fraction * n);
  if (affected == 0) return out;

  Rng rng(seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);

  for (int a = 0; a < affected; ++a) {
    const int i = order[static_cast<std::size_t>(a)];
    const int view = rng.uniform_int(test.num_views());
    // Donor drawn uniformly among samples of any other class.
    int donor = -1;
    for (int tries = 0; tries < 16 * n; ++tries) {
      const int candidate = rng.uniform_int(n);
      if (test.labels[static_cast<std::size_t>(candidate)] !=
          test.labels[static_cast<std::size_t>(i)]) {
        donor = candidate;
        break;
      }
    }
    if (donor < 0) {
      throw DataError(test.name + ": no different-class donor available for conflictive noise");
    }
    auto dst = out.views[static_cast<std::size_t>(view)].row(i);
    auto src = test.views[static_cast<std::size_t>(view)].row(donor);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

MultiViewDataset make_synthetic_fixture(int num_classes, int num_views,
                                        const std::vector<int>& per_class_counts,
                                        double separation, std::uint64_t seed,
                                        std::vector<int> dims) {
  if (num_classes < 2) throw std::invalid_argument("class count must be >= 2");
  if (num_views < 1) throw std::invalid_argument("view count must be >= 1");
  if (static_cast<int>(per_class_counts.size()) != num_classes) {
    throw std::invalid_argument("per-class counts length differs from class count");
  }
  for (int c : per_class_counts) {
    if (c <= 0) throw std::invalid_argument("per-class counts must be positive");
  }
  if (separation < 0.0) throw std::invalid_argument("separation must be >= 0");
  if (dims.empty()) dims.assign(static_cast<std::size_t>(num_views), 8);
  if (static_cast<int>(dims.size()) != num_views) {
    throw std::invalid_argument("dims length differs from view count");
  }
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("view dimensions must be positive");
  }

  Rng rng(seed);
  MultiViewDataset data;
  data.name = "fixture";
  data.num_classes = num_classes;
  data.views.resize(static_cast<std::size_t>(num_views));

  // Class means drawn from a seeded standard normal, then rescaled per view so
  // the minimum pairwise distance equals the requested separation.
  std::vector<std::vector<std::vector<double>>> means(static_cast<std::size_t>(num_views));
  for (int v = 0; v < num_views; ++v) {
    Rng stream = rng.derive(1000 + static_cast<std::uint64_t>(v));
    auto& view_means = means[static_cast<std::size_t>(v)];
    view_means.resize(static_cast<std::size_t>(num_classes));
    for (int k = 0; k < num_classes; ++k) {
      view_means[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(dims[static_cast<std::size_t>(v)]));
      for (double& m : view_means[static_cast<std::size_t>(k)]) m = stream.normal();
    }
    double min_dist = std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_classes; ++a) {
      for (int b = a + 1; b < num_classes; ++b) {
        double d2 = 0.0;
        for (int j = 0; j < dims[static_cast<std::size_t>(v)]; ++j) {
          const double diff = view_means[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] -
                              view_means[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
          d2 += diff * diff;
        }
        min_dist = std::min(min_dist, std::sqrt(d2));
      }
    }
    const double scale = min_dist > 0.0 ? separation / min_dist : 0.0;
    for (auto& mean : view_means) {
      for (double& m : mean) m *= scale;
    }
    data.views[static_cast<std::size_t>(v)].dim = dims[static_cast<std::size_t>(v)];
  }

  for (int k = 0; k < num_classes; ++k) {
    for (int i = 0; i < per_class_counts[static_cast<std::size_t>(k)]; ++i) {
      data.labels.push_back(k);
    }
  }
  for (int v = 0; v < num_views; ++v) {
    Rng stream = rng.derive(2000 + static_cast<std::uint64_t>(v));
    auto& m = data.views[static_cast<std::size_t>(v)];
    m.values.reserve(data.labels.size() * static_cast<std::size_t>(m.dim));
    for (int label : data.labels) {
      const auto& mean = means[static_cast<std::size_t>(v)][static_cast<std::size_t>(label)];
      for (int j = 0; j < m.dim; ++j) {
        m.values.push_back(mean[static_cast<std::size_t>(j)] + stream.normal());
      }
    }
  }
  validate_dataset(data);
  return data;
}

}  // namespace mvlt
