#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mvlt/dataset.hpp"
#include "mvlt/loss.hpp"
#include "mvlt/opinion.hpp"
#include "mvlt/rng.hpp"

namespace mvlt {

// One-hidden-layer perceptron for a single view. Hidden activation and the
// evidence output are both rectifiers, so evidence is >= 0 for any input.
// Dead evidence units (pre-activation < 0 everywhere) are possible and carry
// zero gradient.
struct ViewNetwork {
  int view_id = 0;
  int input_dim = 0;
  int hidden_dim = 0;
  int num_classes = 0;
  std::vector<double> w1;  // hidden_dim x input_dim, row-major
  std::vector<double> b1;  // hidden_dim
  std::vector<double> w2;  // num_classes x hidden_dim, row-major
  std::vector<double> b2;  // num_classes

  std::size_t parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }
};

// Uniform fan-in initialization from the given stream.
ViewNetwork make_view_network(int view_id, int input_dim, int hidden_dim, int num_classes,
                              Rng& stream);

Evidence forward(const ViewNetwork& net, std::span<const double> x);

std::vector<Evidence> per_view_evidence(const std::vector<ViewNetwork>& nets,
                                        const MultiViewDataset& data, int index);

// How the per-sample losses are assembled and reduced over a batch.
struct LossSettings {
  int anneal_epochs = 10;
  // Adds one loss term per view on top of the joint-evidence term.
  bool per_view_terms = true;
  // Batch reduction: mean when true, sum otherwise.
  bool mean_reduction = true;
};

struct ViewGradients {
  std::vector<double> w1, b1, w2, b2;
};

// Loss at fixed parameters; the value backward() differentiates.
double batch_loss(const std::vector<ViewNetwork>& nets, const MultiViewDataset& data,
                  std::span<const int> indices, const LossSettings& settings, int epoch);

// Gradients of batch_loss for every parameter of every view network.
double backward(const std::vector<ViewNetwork>& nets, const MultiViewDataset& data,
                std::span<const int> indices, const LossSettings& settings, int epoch,
                std::vector<ViewGradients>& grads);

struct OptimizerConfig {
  enum class Kind { adam, gradient_descent };
  Kind kind = Kind::adam;
  double step_size = 1e-3;
  int batch_size = 64;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainOptions {
  int epochs = 200;
  bool early_stop = false;
  double early_stop_tolerance = 1e-6;
  int early_stop_window = 10;
};

struct TrainState {
  int epoch = 0;
  std::vector<double> loss_history;  // per-epoch mean loss; length == epoch
  std::uint64_t seed = 0;
};

// Seeded mini-batch training; deterministic for fixed (config, seed).
// Throws NumericError when the loss turns non-finite.
TrainState train(std::vector<ViewNetwork>& nets, const MultiViewDataset& data,
                 const OptimizerConfig& optimizer, const LossSettings& settings,
                 const TrainOptions& options, std::uint64_t seed);

struct Prediction {
  int decision = 0;
  Opinion joint;
  std::vector<Opinion> per_view;
};

// Decision is the argmax of the joint belief; ties go to the lowest class id.
Prediction predict(const std::vector<ViewNetwork>& nets, const MultiViewDataset& data,
                   int index, const std::vector<double>& base_rates);

}  // namespace mvlt
