#include "mvlt/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mvlt/aggregation.hpp"
#include "mvlt/errors.hpp"

namespace mvlt {
namespace {

struct ViewActivations {
  std::vector<double> z1, h, z2, e;
};

ViewActivations run_forward(const ViewNetwork& net, std::span<const double> x) {
  ViewActivations act;
  act.z1.resize(static_cast<std::size_t>(net.hidden_dim));
  act.h.resize(static_cast<std::size_t>(net.hidden_dim));
  for (int i = 0; i < net.hidden_dim; ++i) {
    double z = net.b1[static_cast<std::size_t>(i)];
    const double* w = net.w1.data() + static_cast<std::size_t>(i) * net.input_dim;
    for (int j = 0; j < net.input_dim; ++j) z += w[j] * x[static_cast<std::size_t>(j)];
    act.z1[static_cast<std::size_t>(i)] = z;
    act.h[static_cast<std::size_t>(i)] = z > 0.0 ? z : 0.0;
  }
  act.z2.resize(static_cast<std::size_t>(net.num_classes));
  act.e.resize(static_cast<std::size_t>(net.num_classes));
  for (int i = 0; i < net.num_classes; ++i) {
    double z = net.b2[static_cast<std::size_t>(i)];
    const double* w = net.w2.data() + static_cast<std::size_t>(i) * net.hidden_dim;
    for (int j = 0; j < net.hidden_dim; ++j) z += w[j] * act.h[static_cast<std::size_t>(j)];
    act.z2[static_cast<std::size_t>(i)] = z;
    act.e[static_cast<std::size_t>(i)] = z > 0.0 ? z : 0.0;
  }
  return act;
}

void check_nets(const std::vector<ViewNetwork>& nets, const MultiViewDataset& data) {
  if (nets.empty()) throw std::invalid_argument("no view networks");
  if (static_cast<int>(nets.size()) != data.num_views()) {
    throw std::invalid_argument("network count differs from view count");
  }
  for (int v = 0; v < data.num_views(); ++v) {
    if (nets[static_cast<std::size_t>(v)].input_dim != data.views[static_cast<std::size_t>(v)].dim) {
      throw std::invalid_argument("network " + std::to_string(v) + " input width differs from view");
    }
    if (nets[static_cast<std::size_t>(v)].num_classes != data.num_classes) {
      throw std::invalid_argument("network class count differs from dataset");
    }
  }
}

std::vector<double> one_hot(int label, int k) {
  std::vector<double> y(static_cast<std::size_t>(k), 0.0);
  y[static_cast<std::size_t>(label)] = 1.0;
  return y;
}

}  // namespace

ViewNetwork make_view_network(int view_id, int input_dim, int hidden_dim, int num_classes,
                              Rng& stream) {
  if (input_dim < 1 || hidden_dim < 1 || num_classes < 2) {
    throw std::invalid_argument("bad network shape");
  }
  ViewNetwork net;
  net.view_id = view_id;
  net.input_dim = input_dim;
  net.hidden_dim = hidden_dim;
  net.num_classes = num_classes;
  net.w1.resize(static_cast<std::size_t>(hidden_dim) * input_dim);
  net.b1.assign(static_cast<std::size_t>(hidden_dim), 0.0);
  net.w2.resize(static_cast<std::size_t>(num_classes) * hidden_dim);
  net.b2.assign(static_cast<std::size_t>(num_classes), 0.0);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (double& w : net.w1) w = stream.uniform(-bound1, bound1);
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (double& w : net.w2) w = stream.uniform(-bound2, bound2);
  return net;
}

Evidence forward(const ViewNetwork& net, std::span<const double> x) {
  if (static_cast<int>(x.size()) != net.input_dim) {
    throw std::invalid_argument("input width differs from network");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite network input");
  }
  return Evidence(run_forward(net, x).e);
}

std::vector<Evidence> per_view_evidence(const std::vector<ViewNetwork>& nets,
                                        const MultiViewDataset& data, int index) {
  check_nets(nets, data);
  std::vector<Evidence> evidences;
  evidences.reserve(nets.size());
  for (int v = 0; v < data.num_views(); ++v) {
    evidences.push_back(forward(nets[static_cast<std::size_t>(v)],
                                data.views[static_cast<std::size_t>(v)].row(index)));
  }
  return evidences;
}

double batch_loss(const std::vector<ViewNetwork>& nets, const MultiViewDataset& data,
                  std::span<const int> indices, const LossSettings& settings, int epoch) {
  check_nets(nets, data);
  if (indices.empty()) throw std::invalid_argument("empty batch");
  const int k = data.num_classes;
  const int num_views = data.num_views();
  const LossConfig cfg{settings.anneal_epochs, epoch};

  double total = 0.0;
  std::vector<double> joint(static_cast<std::size_t>(k));
  for (int index : indices) {
    const auto y = one_hot(data.labels[static_cast<std::size_t>(index)], k);
    std::fill(joint.begin(), joint.end(), 0.0);
    for (int v = 0; v < num_views; ++v) {
      const ViewActivations act = run_forward(nets[static_cast<std::size_t>(v)],
                                              data.views[static_cast<std::size_t>(v)].row(index));
      for (int i = 0; i < k; ++i) {
        joint[static_cast<std::size_t>(i)] += act.e[static_cast<std::size_t>(i)] / num_views;
      }
      if (settings.per_view_terms) {
        total += loss_total(dirichlet_from_evidence(Evidence(act.e)), y, cfg);
      }
    }
    total += loss_total(dirichlet_from_evidence(Evidence(joint)), y, cfg);
  }
  return settings.mean_reduction ? total / static_cast<double>(indices.size()) : total;
}

double backward(const std::vector<ViewNetwork>& nets, const MultiViewDataset& data,
                std::span<const int> indices, const LossSettings& settings, int epoch,
                std::vector<ViewGradients>& grads) {
  check_nets(nets, data);
  if (indices.empty()) throw std::invalid_argument("empty batch");
  const int k = data.num_classes;
  const int num_views = data.num_views();
  const LossConfig cfg{settings.anneal_epochs, epoch};

  grads.resize(nets.size());
  for (std::size_t v = 0; v < nets.size(); ++v) {
    grads[v].w1.assign(nets[v].w1.size(), 0.0);
    grads[v].b1.assign(nets[v].b1.size(), 0.0);
    grads[v].w2.assign(nets[v].w2.size(), 0.0);
    grads[v].b2.assign(nets[v].b2.size(), 0.0);
  }

  const double scale =
      settings.mean_reduction ? 1.0 / static_cast<double>(indices.size()) : 1.0;
  double total = 0.0;
  std::vector<ViewActivations> acts(static_cast<std::size_t>(num_views));
  std::vector<double> joint(static_cast<std::size_t>(k));
  std::vector<double> grad_e(static_cast<std::size_t>(k));
  std::vector<double> dz2(static_cast<std::size_t>(k));

  for (int index : indices) {
    const auto y = one_hot(data.labels[static_cast<std::size_t>(index)], k);
    std::fill(joint.begin(), joint.end(), 0.0);
    for (int v = 0; v < num_views; ++v) {
      acts[static_cast<std::size_t>(v)] = run_forward(
          nets[static_cast<std::size_t>(v)], data.views[static_cast<std::size_t>(v)].row(index));
      for (int i = 0; i < k; ++i) {
        joint[static_cast<std::size_t>(i)] +=
            acts[static_cast<std::size_t>(v)].e[static_cast<std::size_t>(i)] / num_views;
      }
    }
    for (double e : joint) {
      if (!std::isfinite(e)) {
        throw NumericError("training diverged: non-finite evidence in the forward pass");
      }
    }
    const Evidence joint_e{std::vector<double>(joint)};
    total += loss_total(dirichlet_from_evidence(joint_e), y, cfg);
    const std::vector<double> joint_grad = loss_grad_evidence(joint_e, y, cfg);

    for (int v = 0; v < num_views; ++v) {
      const ViewActivations& act = acts[static_cast<std::size_t>(v)];
      const ViewNetwork& net = nets[static_cast<std::size_t>(v)];
      ViewGradients& g = grads[static_cast<std::size_t>(v)];

      for (int i = 0; i < k; ++i) {
        grad_e[static_cast<std::size_t>(i)] = joint_grad[static_cast<std::size_t>(i)] / num_views;
      }
      if (settings.per_view_terms) {
        const Evidence view_e{std::vector<double>(act.e)};
        total += loss_total(dirichlet_from_evidence(view_e), y, cfg);
        const std::vector<double> view_grad = loss_grad_evidence(view_e, y, cfg);
        for (int i = 0; i < k; ++i) {
          grad_e[static_cast<std::size_t>(i)] += view_grad[static_cast<std::size_t>(i)];
        }
      }

      const auto x = data.views[static_cast<std::size_t>(v)].row(index);
      for (int i = 0; i < k; ++i) {
        dz2[static_cast<std::size_t>(i)] = act.z2[static_cast<std::size_t>(i)] > 0.0
                                               ? grad_e[static_cast<std::size_t>(i)] * scale
                                               : 0.0;
      }
      for (int i = 0; i < k; ++i) {
        const double d = dz2[static_cast<std::size_t>(i)];
        if (d == 0.0) continue;
        double* row = g.w2.data() + static_cast<std::size_t>(i) * net.hidden_dim;
        for (int j = 0; j < net.hidden_dim; ++j) row[j] += d * act.h[static_cast<std::size_t>(j)];
        g.b2[static_cast<std::size_t>(i)] += d;
      }
      for (int j = 0; j < net.hidden_dim; ++j) {
        if (act.z1[static_cast<std::size_t>(j)] <= 0.0) continue;
        double dh = 0.0;
        for (int i = 0; i < k; ++i) {
          dh += net.w2[static_cast<std::size_t>(i) * net.hidden_dim + j] *
                dz2[static_cast<std::size_t>(i)];
        }
        if (dh == 0.0) continue;
        double* row = g.w1.data() + static_cast<std::size_t>(j) * net.input_dim;
        for (int c = 0; c < net.input_dim; ++c) row[c] += dh * x[static_cast<std::size_t>(c)];
        g.b1[static_cast<std::size_t>(j)] += dh;
      }
    }
  }
  return settings.mean_reduction ? total / static_cast<double>(indices.size()) : total;
}

namespace {

struct AdamMoments {
  std::vector<double> m, v;
};

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamMoments& mom,
               const OptimizerConfig& cfg, int step) {
  const double correction1 = 1.0 - std::pow(cfg.beta1, step);
  const double correction2 = 1.0 - std::pow(cfg.beta2, step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    mom.m[i] = cfg.beta1 * mom.m[i] + (1.0 - cfg.beta1) * grad[i];
    mom.v[i] = cfg.beta2 * mom.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = mom.m[i] / correction1;
    const double v_hat = mom.v[i] / correction2;
    params[i] -= cfg.step_size * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

}  // namespace

TrainState train(std::vector<ViewNetwork>& nets, const MultiViewDataset& data,
                 const OptimizerConfig& optimizer, const LossSettings& settings,
                 const TrainOptions& options, std::uint64_t seed) {
  check_nets(nets, data);
  if (optimizer.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (options.epochs < 0) throw std::invalid_argument("epoch budget must be >= 0");

  TrainState state;
  state.seed = seed;
  const int n = data.size();
  if (n == 0) throw std::invalid_argument("empty training set");

  std::vector<AdamMoments> mom1(nets.size()), mom2(nets.size()), mom3(nets.size()),
      mom4(nets.size());
  for (std::size_t v = 0; v < nets.size(); ++v) {
    mom1[v] = {std::vector<double>(nets[v].w1.size(), 0.0), std::vector<double>(nets[v].w1.size(), 0.0)};
    mom2[v] = {std::vector<double>(nets[v].b1.size(), 0.0), std::vector<double>(nets[v].b1.size(), 0.0)};
    mom3[v] = {std::vector<double>(nets[v].w2.size(), 0.0), std::vector<double>(nets[v].w2.size(), 0.0)};
    mom4[v] = {std::vector<double>(nets[v].b2.size(), 0.0), std::vector<double>(nets[v].b2.size(), 0.0)};
  }

  Rng shuffle_stream = Rng(seed).derive(17);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  std::vector<ViewGradients> grads;
  int adam_step_count = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle_stream.shuffle(order);
    double epoch_loss_sum = 0.0;
    for (int start = 0; start < n; start += optimizer.batch_size) {
      const int len = std::min(optimizer.batch_size, n - start);
      const std::span<const int> batch(order.data() + start, static_cast<std::size_t>(len));
      const double loss = backward(nets, data, batch, settings, epoch, grads);
      if (!std::isfinite(loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                           ", batch offset " + std::to_string(start));
      }
      epoch_loss_sum += settings.mean_reduction ? loss * len : loss;

      ++adam_step_count;
      for (std::size_t v = 0; v < nets.size(); ++v) {
        if (optimizer.kind == OptimizerConfig::Kind::adam) {
          adam_step(nets[v].w1, grads[v].w1, mom1[v], optimizer, adam_step_count);
          adam_step(nets[v].b1, grads[v].b1, mom2[v], optimizer, adam_step_count);
          adam_step(nets[v].w2, grads[v].w2, mom3[v], optimizer, adam_step_count);
          adam_step(nets[v].b2, grads[v].b2, mom4[v], optimizer, adam_step_count);
        } else {
          for (std::size_t i = 0; i < nets[v].w1.size(); ++i)
            nets[v].w1[i] -= optimizer.step_size * grads[v].w1[i];
          for (std::size_t i = 0; i < nets[v].b1.size(); ++i)
            nets[v].b1[i] -= optimizer.step_size * grads[v].b1[i];
          for (std::size_t i = 0; i < nets[v].w2.size(); ++i)
            nets[v].w2[i] -= optimizer.step_size * grads[v].w2[i];
          for (std::size_t i = 0; i < nets[v].b2.size(); ++i)
            nets[v].b2[i] -= optimizer.step_size * grads[v].b2[i];
        }
      }
    }
    state.loss_history.push_back(epoch_loss_sum / static_cast<double>(n));
    state.epoch = epoch + 1;

    if (options.early_stop && state.epoch > options.early_stop_window) {
      const double before =
          state.loss_history[static_cast<std::size_t>(state.epoch - 1 - options.early_stop_window)];
      const double now = state.loss_history.back();
      if (before - now < options.early_stop_tolerance) break;
    }
  }
  return state;
}

Prediction predict(const std::vector<ViewNetwork>& nets, const MultiViewDataset& data,
                   int index, const std::vector<double>& base_rates) {
  const std::vector<Evidence> evidences = per_view_evidence(nets, data, index);
  const Evidence joint = mean_evidence(evidences);
  Opinion joint_opinion = opinion_from_evidence(joint, base_rates);

  int decision = 0;
  for (int i = 1; i < joint.k(); ++i) {
    if (joint[i] > joint[decision]) decision = i;
  }

  std::vector<Opinion> per_view;
  per_view.reserve(evidences.size());
  for (const Evidence& e : evidences) {
    per_view.push_back(opinion_from_evidence(e, base_rates));
  }
  return Prediction{decision, std::move(joint_opinion), std::move(per_view)};
}

}  // namespace mvlt
