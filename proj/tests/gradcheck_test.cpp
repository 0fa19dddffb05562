#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "mvlt/dataset.hpp"
#include "mvlt/network.hpp"
#include "mvlt/rng.hpp"

namespace mvlt {
namespace {

// Random tiny dataset: V views, d_v <= 4, K <= 3, a handful of samples.
MultiViewDataset tiny_dataset(Rng& rng, int num_views, int num_classes, int samples,
                              std::vector<int>& dims_out) {
  MultiViewDataset data;
  data.name = "tiny";
  data.num_classes = num_classes;
  dims_out.clear();
  for (int v = 0; v < num_views; ++v) {
    ViewMatrix m;
    m.dim = 1 + rng.uniform_int(4);
    dims_out.push_back(m.dim);
    m.values.resize(static_cast<std::size_t>(m.dim * samples));
    for (double& x : m.values) x = rng.uniform(-2.0, 2.0);
    data.views.push_back(std::move(m));
  }
  data.labels.resize(static_cast<std::size_t>(samples));
  for (int& l : data.labels) l = rng.uniform_int(num_classes);
  return data;
}

double loss_with_params(std::vector<ViewNetwork> nets, const MultiViewDataset& data,
                        const std::vector<int>& indices, const LossSettings& settings, int epoch,
                        int view, int which, std::size_t slot, double value) {
  ViewNetwork& n = nets[static_cast<std::size_t>(view)];
  switch (which) {
    case 0: n.w1[slot] = value; break;
    case 1: n.b1[slot] = value; break;
    case 2: n.w2[slot] = value; break;
    default: n.b2[slot] = value; break;
  }
  return batch_loss(nets, data, indices, settings, epoch);
}

// Full-pipeline gradient check: loss through aggregation through every
// network parameter, against central finite differences.
TEST(GradCheck, FiftyRandomTinyConfigurations) {
  Rng rng(123456);
  const double step = 1e-5;
  int checked_params = 0;
  for (int config = 0; config < 50; ++config) {
    int num_views = 1 + rng.uniform_int(3);
    int num_classes = 2 + rng.uniform_int(2);
    int samples = 2 + rng.uniform_int(4);
    std::vector<int> dims;
    MultiViewDataset data = tiny_dataset(rng, num_views, num_classes, samples, dims);

    std::vector<ViewNetwork> nets;
    for (int v = 0; v < num_views; ++v) {
      Rng init = rng.derive(1000 + config * 10 + v);
      int hidden = 1 + rng.uniform_int(5);
      nets.push_back(make_view_network(v, dims[static_cast<std::size_t>(v)], hidden,
                                       num_classes, init));
      // Nonzero biases so both rectifier stages have active and dead regions.
      for (double& b : nets.back().b1) b = rng.uniform(-0.3, 0.3);
      for (double& b : nets.back().b2) b = rng.uniform(-0.1, 0.5);
    }

    LossSettings settings;
    settings.anneal_epochs = 1 + rng.uniform_int(10);
    settings.per_view_terms = rng.uniform01() < 0.5;
    settings.mean_reduction = rng.uniform01() < 0.5;
    int epoch = rng.uniform_int(15);

    std::vector<int> indices(static_cast<std::size_t>(samples));
    std::iota(indices.begin(), indices.end(), 0);

    std::vector<ViewGradients> grads;
    backward(nets, data, indices, settings, epoch, grads);
    ASSERT_EQ(grads.size(), nets.size());

    for (int v = 0; v < num_views; ++v) {
      const ViewNetwork& net = nets[static_cast<std::size_t>(v)];
      const ViewGradients& g = grads[static_cast<std::size_t>(v)];
      auto probe = [&](int which, std::size_t slot, double current, double analytic) {
        double hi = loss_with_params(nets, data, indices, settings, epoch, v, which, slot,
                                     current + step);
        double lo = loss_with_params(nets, data, indices, settings, epoch, v, which, slot,
                                     current - step);
        double fd = (hi - lo) / (2.0 * step);
        double denom = std::max({1e-6, std::abs(fd), std::abs(analytic)});
        EXPECT_LT(std::abs(analytic - fd) / denom, 1e-4)
            << "config " << config << " view " << v << " tensor " << which << " slot " << slot;
        ++checked_params;
      };
      for (std::size_t i = 0; i < net.w1.size(); ++i) probe(0, i, net.w1[i], g.w1[i]);
      for (std::size_t i = 0; i < net.b1.size(); ++i) probe(1, i, net.b1[i], g.b1[i]);
      for (std::size_t i = 0; i < net.w2.size(); ++i) probe(2, i, net.w2[i], g.w2[i]);
      for (std::size_t i = 0; i < net.b2.size(); ++i) probe(3, i, net.b2[i], g.b2[i]);
    }
  }
  // Sanity: the sweep actually exercised a meaningful parameter volume.
  EXPECT_GT(checked_params, 2000);
}

TEST(GradCheck, SingleViewEqualsPlainEvidentialGradient) {
  // With V = 1 the joint path is the view itself; per-view terms double the
  // same gradient.
  Rng rng(777);
  std::vector<int> dims;
  MultiViewDataset data = tiny_dataset(rng, 1, 3, 4, dims);
  Rng init(5);
  std::vector<ViewNetwork> nets{make_view_network(0, dims[0], 4, 3, init)};

  std::vector<int> indices{0, 1, 2, 3};
  LossSettings joint_only;
  joint_only.per_view_terms = false;
  LossSettings with_view_terms;
  with_view_terms.per_view_terms = true;

  std::vector<ViewGradients> g_joint, g_both;
  backward(nets, data, indices, joint_only, 3, g_joint);
  backward(nets, data, indices, with_view_terms, 3, g_both);
  for (std::size_t i = 0; i < g_joint[0].w1.size(); ++i) {
    EXPECT_NEAR(g_both[0].w1[i], 2.0 * g_joint[0].w1[i], 1e-9);
  }
}

TEST(GradCheck, DuplicatedViewsHalveTheJointGradient) {
  // Two identical views: each receives half the joint-term gradient of the
  // single-view case (chain rule through the 1/V evidence mean).
  Rng rng(4242);
  MultiViewDataset one;
  one.name = "dup";
  one.num_classes = 2;
  ViewMatrix m;
  m.dim = 3;
  m.values = {0.4, -1.0, 0.7, 1.2, 0.1, -0.6};
  one.views.push_back(m);
  one.labels = {0, 1};

  MultiViewDataset two = one;
  two.views.push_back(m);

  Rng init(11);
  ViewNetwork net = make_view_network(0, 3, 4, 2, init);
  for (double& b : net.b1) b = 0.1;
  std::vector<ViewNetwork> nets_one{net};
  ViewNetwork net_b = net;
  net_b.view_id = 1;
  std::vector<ViewNetwork> nets_two{net, net_b};

  std::vector<int> indices{0, 1};
  LossSettings settings;
  settings.per_view_terms = false;

  std::vector<ViewGradients> g_one, g_two;
  backward(nets_one, one, indices, settings, 0, g_one);
  backward(nets_two, two, indices, settings, 0, g_two);
  for (std::size_t i = 0; i < g_one[0].w1.size(); ++i) {
    EXPECT_NEAR(g_two[0].w1[i], 0.5 * g_one[0].w1[i], 1e-9);
    EXPECT_NEAR(g_two[1].w1[i], 0.5 * g_one[0].w1[i], 1e-9);
  }
}

TEST(GradCheck, BackwardReturnsBatchLoss) {
  Rng rng(31);
  std::vector<int> dims;
  MultiViewDataset data = tiny_dataset(rng, 2, 2, 5, dims);
  Rng init(6);
  std::vector<ViewNetwork> nets{make_view_network(0, dims[0], 3, 2, init),
                                make_view_network(1, dims[1], 3, 2, init)};
  std::vector<int> indices{0, 2, 4};
  LossSettings settings;
  std::vector<ViewGradients> grads;
  double from_backward = backward(nets, data, indices, settings, 2, grads);
  double from_loss = batch_loss(nets, data, indices, settings, 2);
  EXPECT_DOUBLE_EQ(from_backward, from_loss);
}

}  // namespace
}  // namespace mvlt
