#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvlt/aggregation.hpp"
#include "mvlt/checkpoint.hpp"
#include "mvlt/config.hpp"
#include "mvlt/dataset.hpp"
#include "mvlt/experiment.hpp"
#include "mvlt/loss.hpp"
#include "mvlt/network.hpp"
#include "mvlt/opinion.hpp"
#include "mvlt/oversample.hpp"
#include "mvlt/report.hpp"
#include "mvlt/rng.hpp"

namespace mvlt {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Opinion random_opinion(Rng& rng, int k) {
  std::vector<double> e(static_cast<std::size_t>(k));
  for (double& x : e) x = rng.uniform(0.0, 10.0);
  return opinion_from_evidence(Evidence{e}, uniform_base_rates(k));
}

// ---------------------------------------------------------------------------
// The shared acceptance fixture: one oversized deterministic draw, sliced per
// class into a long-tailed train set (100/60/36/22/13/8) and a balanced
// 25-per-class test set. Slicing keeps the class means shared and the rows
// disjoint. Geometry note: this fixture seed places the rarest class next to
// a head class, the regime the weighted synthesis is designed for.
constexpr std::uint64_t kFixtureSeed = 20;
constexpr double kSeparation = 2.0;
const std::vector<int> kTrainCounts{100, 60, 36, 22, 13, 8};
constexpr int kTestPerClass = 25;

struct FixturePair {
  MultiViewDataset train;  // normalized, long-tailed counts
  MultiViewDataset test;   // normalized, balanced
};

const FixturePair& acceptance_fixture() {
  static const FixturePair pair = [] {
    std::vector<int> full_counts;
    for (int c : kTrainCounts) full_counts.push_back(c + kTestPerClass);
    const auto full = make_synthetic_fixture(6, 3, full_counts, kSeparation, kFixtureSeed);
    MultiViewDataset train_raw, test_raw;
    train_raw.name = test_raw.name = "fixture";
    train_raw.num_classes = test_raw.num_classes = 6;
    train_raw.views.resize(3);
    test_raw.views.resize(3);
    int row = 0;
    for (int k = 0; k < 6; ++k) {
      for (int i = 0; i < full_counts[static_cast<std::size_t>(k)]; ++i, ++row) {
        auto& dst = i < kTrainCounts[static_cast<std::size_t>(k)] ? train_raw : test_raw;
        dst.labels.push_back(k);
        for (int v = 0; v < 3; ++v) {
          auto src = full.views[static_cast<std::size_t>(v)].row(row);
          auto& view = dst.views[static_cast<std::size_t>(v)];
          view.dim = full.views[static_cast<std::size_t>(v)].dim;
          view.values.insert(view.values.end(), src.begin(), src.end());
        }
      }
    }
    const auto norm = fit_normalization(train_raw);
    return FixturePair{apply_normalization(train_raw, norm), apply_normalization(test_raw, norm)};
  }();
  return pair;
}

ExperimentConfig acceptance_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.network.hidden = 32;
  cfg.network.epochs = 150;
  cfg.network.batch_size = 64;
  cfg.network.step_size = 1e-3;
  cfg.loss.anneal_epochs = 1;
  cfg.oversample.r = 3;
  cfg.long_tail.apply = false;  // the fixture is long-tailed by construction
  return cfg;
}

// Ten seeds of the three ablations, shared by the ordering, noise, and
// conflictive checks. Built once; the first test that needs it pays the cost
// inside its own timer.
struct SeedBundle {
  std::vector<TrainedModel> v1;    // phase 1 only
  std::vector<TrainedModel> full;  // phase 2, uncertainty weights
  std::vector<TrainedModel> v2;    // phase 2, random weights
};

const SeedBundle& seed_bundle() {
  static const SeedBundle bundle = [] {
    const auto& fx = acceptance_fixture();
    SeedBundle b;
    for (std::uint64_t s = 1; s <= 10; ++s) {
      ExperimentConfig cfg = acceptance_config(s);
      auto m1 = train_model(fx.train, cfg, seed_tags::kPhase1Init, seed_tags::kPhase1Shuffle);

      auto ov = run_oversample(fx.train, m1, cfg);
      b.full.push_back(
          train_model(ov.augmented, cfg, seed_tags::kPhase2Init, seed_tags::kPhase2Shuffle));

      ExperimentConfig cv = cfg;
      cv.oversample.ablation = "v2-random-weights";
      auto ovv = run_oversample(fx.train, m1, cv);
      b.v2.push_back(
          train_model(ovv.augmented, cv, seed_tags::kPhase2Init, seed_tags::kPhase2Shuffle));

      b.v1.push_back(std::move(m1));
    }
    return b;
  }();
  return bundle;
}

double clean_accuracy(const TrainedModel& model, std::uint64_t seed) {
  return evaluate_model(model, acceptance_fixture().test, NoiseSettings{},
                        Rng(seed).derive(seed_tags::kNoise).seed(), "accept")
      .overall_accuracy;
}

double conflictive_accuracy(const TrainedModel& model, std::uint64_t seed) {
  NoiseSettings noise;
  noise.kind = "conflictive";
  noise.fraction = 1.0;
  return evaluate_model(model, acceptance_fixture().test, noise,
                        Rng(seed).derive(seed_tags::kNoise).seed(), "accept")
      .overall_accuracy;
}

// --- 1: the three joint-opinion constructions agree ------------------------
TEST(Acceptance, AggregationEquivalence) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(20250101);
  double max_delta = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const int k = 2 + rng.uniform_int(9);   // K <= 10
    const int v = 2 + rng.uniform_int(5);   // V <= 6
    std::vector<Opinion> opinions;
    std::vector<Evidence> evidences;
    for (int i = 0; i < v; ++i) {
      opinions.push_back(random_opinion(rng, k));
      evidences.push_back(evidence_from_opinion(opinions.back(), k));
    }

    const Opinion folded = aggregate_views(opinions).first;

    Evidence fused = evidences.front();
    for (int i = 1; i < v; ++i) fused = fuse_pair_evidence(fused, i, evidences[static_cast<std::size_t>(i)]);
    const Opinion via_evidence = opinion_from_evidence(fused, uniform_base_rates(k));

    const Opinion via_mean = opinion_from_evidence(mean_evidence(evidences), uniform_base_rates(k));

    max_delta = std::max(max_delta, std::abs(folded.uncertainty() - via_evidence.uncertainty()));
    max_delta = std::max(max_delta, std::abs(folded.uncertainty() - via_mean.uncertainty()));
    for (int i = 0; i < k; ++i) {
      const std::size_t j = static_cast<std::size_t>(i);
      max_delta = std::max(max_delta, std::abs(folded.beliefs()[j] - via_evidence.beliefs()[j]));
      max_delta = std::max(max_delta, std::abs(folded.beliefs()[j] - via_mean.beliefs()[j]));
      max_delta = std::max(max_delta, std::abs(fused[i] - mean_evidence(evidences)[i]));
    }
  }
  const double wall = seconds_since(start);
  const bool pass = max_delta < 1e-9 && wall < 5.0;
  std::printf("[criterion 1] %s aggregation equivalence: %d folds, max delta %.2e (tol 1e-9), %.2f s (budget 5 s)\n",
              pass ? "PASS" : "FAIL", trials, max_delta, wall);
  EXPECT_LT(max_delta, 1e-9);
  EXPECT_LT(wall, 5.0);
}

// --- 2: fused uncertainty moves with the incoming view ---------------------
TEST(Acceptance, UncertaintyMonotonicity) {
  Rng rng(20250202);
  const int trials = 10000;
  int below = 0, equal = 0, above = 0, violations = 0;
  for (int t = 0; t < trials; ++t) {
    const int k = 2 + rng.uniform_int(9);
    const Opinion a = random_opinion(rng, k);
    Opinion b = random_opinion(rng, k);
    if (t % 3 == 0) {
      // Rescale b's evidence so the uncertainties match exactly.
      const Evidence ea = evidence_from_opinion(a, k);
      const Evidence eb = evidence_from_opinion(b, k);
      double sa = 0.0, sb = 0.0;
      for (int i = 0; i < k; ++i) { sa += ea[i]; sb += eb[i]; }
      if (sb > 0.0) {
        std::vector<double> scaled(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) scaled[static_cast<std::size_t>(i)] = eb[i] * (sa / sb);
        b = opinion_from_evidence(Evidence{scaled}, uniform_base_rates(k));
      }
    }
    const double ua = a.uncertainty();
    const double ub = b.uncertainty();
    const double fused = fuse_pair_opinion(a, 1, b).uncertainty();
    if (ub < ua - 1e-12) {
      ++below;
      if (!(fused < ua)) ++violations;
    } else if (ub > ua + 1e-12) {
      ++above;
      if (!(fused > ua)) ++violations;
    } else {
      ++equal;
      if (std::abs(fused - ua) > 1e-12) ++violations;
    }
  }
  const bool pass = violations == 0 && below > 1000 && equal > 1000 && above > 1000;
  std::printf("[criterion 2] %s uncertainty case analysis: %d pairs (%d lower / %d equal / %d higher), %d violations (tol 1e-12)\n",
              pass ? "PASS" : "FAIL", trials, below, equal, above, violations);
  EXPECT_EQ(violations, 0);
  EXPECT_GT(below, 1000);
  EXPECT_GT(equal, 1000);
  EXPECT_GT(above, 1000);
}

// --- 3: hand-derived values -------------------------------------------------
TEST(Acceptance, WorkedValues) {
  const Opinion a({0.4, 0.1}, 0.5, uniform_base_rates(2));
  const Opinion b({0.7, 0.1}, 0.2, uniform_base_rates(2));
  const double fused_u = fuse_pair_opinion(a, 1, b).uncertainty();
  const double expected_u = 0.1 / 0.35;

  const double ace = loss_ace(dirichlet_from_evidence(Evidence{{1.0, 0.0}}), {1.0, 0.0});

  const double entropy = uncertainty_entropy(Opinion({0.8, 0.2}, 0.0, uniform_base_rates(2)),
                                             {1.0, 0.0});
  const double expected_entropy = -std::log(0.8);

  const double d1 = std::abs(fused_u - expected_u);
  const double d2 = std::abs(ace - 0.5);
  const double d3 = std::abs(entropy - expected_entropy);
  const bool pass = d1 < 1e-9 && d2 < 1e-9 && d3 < 1e-9;
  std::printf("[criterion 3] %s worked values: fused u %.9f (want %.9f), adjusted CE %.9f (want 0.5), entropy %.9f (want %.9f), tol 1e-9\n",
              pass ? "PASS" : "FAIL", fused_u, expected_u, ace, entropy, expected_entropy);
  EXPECT_LT(d1, 1e-9);
  EXPECT_LT(d2, 1e-9);
  EXPECT_LT(d3, 1e-9);
}

// --- 4: analytic gradients vs central finite differences --------------------
TEST(Acceptance, GradientCheck) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(20250404);
  const double step = 1e-5;
  double max_rel = 0.0;
  int checked = 0;
  for (int config = 0; config < 50; ++config) {
    const int num_views = 1 + rng.uniform_int(3);
    const int num_classes = 2 + rng.uniform_int(2);
    const int samples = 2 + rng.uniform_int(4);

    MultiViewDataset data;
    data.name = "tiny";
    data.num_classes = num_classes;
    std::vector<int> dims;
    for (int v = 0; v < num_views; ++v) {
      ViewMatrix m;
      m.dim = 1 + rng.uniform_int(4);
      dims.push_back(m.dim);
      m.values.resize(static_cast<std::size_t>(m.dim * samples));
      for (double& x : m.values) x = rng.uniform(-2.0, 2.0);
      data.views.push_back(std::move(m));
    }
    data.labels.resize(static_cast<std::size_t>(samples));
    for (int& l : data.labels) l = rng.uniform_int(num_classes);

    std::vector<ViewNetwork> nets;
    for (int v = 0; v < num_views; ++v) {
      Rng init = rng.derive(9000 + static_cast<std::uint64_t>(config * 10 + v));
      nets.push_back(make_view_network(v, dims[static_cast<std::size_t>(v)],
                                       1 + rng.uniform_int(5), num_classes, init));
      for (double& bias : nets.back().b1) bias = rng.uniform(-0.3, 0.3);
      for (double& bias : nets.back().b2) bias = rng.uniform(-0.1, 0.5);
    }

    LossSettings settings;
    settings.anneal_epochs = 1 + rng.uniform_int(10);
    settings.per_view_terms = rng.uniform01() < 0.5;
    settings.mean_reduction = rng.uniform01() < 0.5;
    const int epoch = rng.uniform_int(15);
    std::vector<int> indices(static_cast<std::size_t>(samples));
    std::iota(indices.begin(), indices.end(), 0);

    std::vector<ViewGradients> grads;
    backward(nets, data, indices, settings, epoch, grads);

    auto probe = [&](int view, int which, std::size_t slot, double current, double analytic) {
      auto loss_at = [&](double value) {
        std::vector<ViewNetwork> copy = nets;
        ViewNetwork& n = copy[static_cast<std::size_t>(view)];
        switch (which) {
          case 0: n.w1[slot] = value; break;
          case 1: n.b1[slot] = value; break;
          case 2: n.w2[slot] = value; break;
          default: n.b2[slot] = value; break;
        }
        return batch_loss(copy, data, indices, settings, epoch);
      };
      const double fd = (loss_at(current + step) - loss_at(current - step)) / (2.0 * step);
      const double denom = std::max({1e-6, std::abs(fd), std::abs(analytic)});
      max_rel = std::max(max_rel, std::abs(analytic - fd) / denom);
      ++checked;
    };
    for (int v = 0; v < num_views; ++v) {
      const ViewNetwork& net = nets[static_cast<std::size_t>(v)];
      const ViewGradients& g = grads[static_cast<std::size_t>(v)];
      for (std::size_t i = 0; i < net.w1.size(); ++i) probe(v, 0, i, net.w1[i], g.w1[i]);
      for (std::size_t i = 0; i < net.b1.size(); ++i) probe(v, 1, i, net.b1[i], g.b1[i]);
      for (std::size_t i = 0; i < net.w2.size(); ++i) probe(v, 2, i, net.w2[i], g.w2[i]);
      for (std::size_t i = 0; i < net.b2.size(); ++i) probe(v, 3, i, net.b2[i], g.b2[i]);
    }
  }
  const double wall = seconds_since(start);
  const bool pass = max_rel < 1e-4 && wall < 30.0;
  std::printf("[criterion 4] %s gradient check: 50 configurations, %d parameters, max relative error %.2e (tol 1e-4), %.2f s (budget 30 s)\n",
              pass ? "PASS" : "FAIL", checked, max_rel, wall);
  EXPECT_LT(max_rel, 1e-4);
  EXPECT_LT(wall, 30.0);
  EXPECT_GT(checked, 1500);
}

// --- 5: oversampling contracts on the long-tailed fixture --------------------
TEST(Acceptance, OversamplingContracts) {
  const auto start = std::chrono::steady_clock::now();
  const auto& fx = acceptance_fixture();

  // Any trained scorer works for the contracts; keep it cheap.
  ExperimentConfig cfg = acceptance_config(1);
  cfg.network.epochs = 40;
  const auto model = train_model(fx.train, cfg, seed_tags::kPhase1Init, seed_tags::kPhase1Shuffle);
  const auto evidences = compute_evidence_table(model.nets, fx.train);

  const int target = *std::max_element(kTrainCounts.begin(), kTrainCounts.end());
  std::vector<PseudoSample> all;
  for (int k = 1; k < 6; ++k) {
    auto outcome = balance_class(fx.train, k, target, evidences, cfg.oversample.r,
                                 WeightMode::uncertainty, model.base_rates,
                                 Rng(cfg.seed).derive(seed_tags::kOversampleBase +
                                                      static_cast<std::uint64_t>(k)));
    for (auto& p : outcome.samples) all.push_back(std::move(p));
  }

  const auto augmented = append_pseudo_samples(fx.train, all);
  std::vector<int> counts(6, 0);
  for (int label : augmented.labels) counts[static_cast<std::size_t>(label)] += 1;
  bool counts_equal = true;
  for (int c : counts) counts_equal = counts_equal && c == target;

  double max_weight_delta = 0.0;
  double max_hull_delta = 0.0;
  for (const auto& p : all) {
    for (int v = 0; v < 3; ++v) {
      const auto& w = p.provenance.weights_per_view[static_cast<std::size_t>(v)];
      double sum = 0.0;
      for (double x : w) {
        sum += x;
        if (x < 0.0) max_weight_delta = std::max(max_weight_delta, -x);
      }
      max_weight_delta = std::max(max_weight_delta, std::abs(sum - 1.0));

      // Convex-hull membership, shown two ways: the exact reconstruction from
      // the recorded generators, and the componentwise bounding box.
      const auto& view = fx.train.views[static_cast<std::size_t>(v)];
      std::vector<int> gens{p.provenance.center};
      gens.insert(gens.end(), p.provenance.neighbors.begin(), p.provenance.neighbors.end());
      for (int d = 0; d < view.dim; ++d) {
        double rebuilt = 0.0, lo = 1e300, hi = -1e300;
        for (std::size_t gi = 0; gi < gens.size(); ++gi) {
          const double coord = view.row(gens[gi])[static_cast<std::size_t>(d)];
          rebuilt += w[gi] * coord;
          lo = std::min(lo, coord);
          hi = std::max(hi, coord);
        }
        const double x = p.per_view_features[static_cast<std::size_t>(v)][static_cast<std::size_t>(d)];
        max_hull_delta = std::max(max_hull_delta, std::abs(rebuilt - x));
        if (x < lo) max_hull_delta = std::max(max_hull_delta, lo - x);
        if (x > hi) max_hull_delta = std::max(max_hull_delta, x - hi);
      }
    }
  }

  const double wall = seconds_since(start);
  const bool pass = counts_equal && max_weight_delta < 1e-9 && max_hull_delta < 1e-9 && wall < 10.0;
  std::printf("[criterion 5] %s oversampling contracts: %zu pseudo-samples, balanced counts %s, max weight-sum delta %.2e, max hull delta %.2e (tol 1e-9), %.2f s (budget 10 s)\n",
              pass ? "PASS" : "FAIL", all.size(), counts_equal ? "yes" : "no", max_weight_delta,
              max_hull_delta, wall);
  EXPECT_TRUE(counts_equal);
  EXPECT_EQ(all.size(), static_cast<std::size_t>(5 * target) -
                            static_cast<std::size_t>(60 + 36 + 22 + 13 + 8));
  EXPECT_LT(max_weight_delta, 1e-9);
  EXPECT_LT(max_hull_delta, 1e-9);
  EXPECT_LT(wall, 10.0);
}

// --- 6: ablation ordering over ten seeds -------------------------------------
TEST(Acceptance, AblationOrdering) {
  const auto start = std::chrono::steady_clock::now();
  const auto& bundle = seed_bundle();
  double v1 = 0.0, v2 = 0.0, full = 0.0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const std::size_t i = static_cast<std::size_t>(s - 1);
    v1 += clean_accuracy(bundle.v1[i], s);
    v2 += clean_accuracy(bundle.v2[i], s);
    full += clean_accuracy(bundle.full[i], s);
  }
  v1 /= 10.0;
  v2 /= 10.0;
  full /= 10.0;
  const double wall = seconds_since(start);
  const bool pass = full >= v2 && v2 >= v1 && full - v1 >= 0.02 && wall < 600.0;
  std::printf("[criterion 6] %s ablation ordering: mean accuracy full %.4f >= random-weights %.4f >= no-oversample %.4f, full-v1 %+.4f (need >= 0.02), %.1f s (budget 600 s)\n",
              pass ? "PASS" : "FAIL", full, v2, v1, full - v1, wall);
  EXPECT_GE(full, v2);
  EXPECT_GE(v2, v1);
  EXPECT_GE(full - v1, 0.02);
  EXPECT_LT(wall, 600.0);
}

// --- 7: joint uncertainty rises with injected noise --------------------------
TEST(Acceptance, UncertaintyVsNoise) {
  const auto start = std::chrono::steady_clock::now();
  const auto& bundle = seed_bundle();
  const double sigmas[4] = {0.0, 0.1, 1.0, 10.0};
  double u[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::uint64_t s = 1; s <= 5; ++s) {
    for (int si = 0; si < 4; ++si) {
      NoiseSettings noise;
      noise.kind = "gaussian";
      noise.sigma = sigmas[si];
      noise.clip = 0.8;
      const auto seed = Rng(s).derive(seed_tags::kNoise).derive(static_cast<std::uint64_t>(si)).seed();
      u[si] += evaluate_model(bundle.full[static_cast<std::size_t>(s - 1)],
                              acceptance_fixture().test, noise, seed, "accept")
                   .mean_uncertainty;
    }
  }
  for (double& x : u) x /= 5.0;
  const double wall = seconds_since(start);
  const bool increasing = u[0] < u[1] && u[1] < u[2] && u[2] < u[3];
  const bool pass = increasing && wall < 300.0;
  std::printf("[criterion 7] %s uncertainty vs noise: mean joint u %.4f < %.4f < %.4f < %.4f across sigma {0, 0.1, 1, 10} (5 seeds, shrinkage cap 0.8), %.1f s (budget 300 s)\n",
              pass ? "PASS" : "FAIL", u[0], u[1], u[2], u[3], wall);
  EXPECT_LT(u[0], u[1]);
  EXPECT_LT(u[1], u[2]);
  EXPECT_LT(u[2], u[3]);
  EXPECT_LT(wall, 300.0);
}

// --- 8: conflictive views degrade accuracy, oversampling keeps an edge -------
TEST(Acceptance, ConflictiveDegradation) {
  const auto start = std::chrono::steady_clock::now();
  const auto& bundle = seed_bundle();
  double clean_full = 0.0, conf_full = 0.0, conf_v1 = 0.0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const std::size_t i = static_cast<std::size_t>(s - 1);
    clean_full += clean_accuracy(bundle.full[i], s);
    conf_full += conflictive_accuracy(bundle.full[i], s);
    conf_v1 += conflictive_accuracy(bundle.v1[i], s);
  }
  clean_full /= 10.0;
  conf_full /= 10.0;
  conf_v1 /= 10.0;
  const double wall = seconds_since(start);
  const bool pass = conf_full < clean_full && conf_full > conf_v1 && wall < 600.0;
  std::printf("[criterion 8] %s conflictive degradation: full clean %.4f > full conflictive %.4f > no-oversample conflictive %.4f (10 seeds), %.1f s (budget 600 s)\n",
              pass ? "PASS" : "FAIL", clean_full, conf_full, conf_v1, wall);
  EXPECT_LT(conf_full, clean_full);
  EXPECT_GT(conf_full, conf_v1);
  EXPECT_LT(wall, 600.0);
}

// --- 9: optional real-dataset spot check (reported, never gating) ------------
TEST(Acceptance, HandWrittenSpotCheck) {
  const char* manifest = std::getenv("MVLT_HANDWRITTEN_MANIFEST");
  if (manifest == nullptr || manifest[0] == '\0') {
    std::printf("[criterion 9] SKIP handwritten spot check: set MVLT_HANDWRITTEN_MANIFEST to a dataset manifest to enable (non-gating)\n");
    GTEST_SKIP();
  }
  ExperimentConfig cfg;
  cfg.manifest = manifest;
  cfg.seed = 7;
  const auto raw = load_dataset(cfg.manifest);
  const auto outcome = run_pipeline(raw, cfg);
  const double acc = outcome.final_report().overall_accuracy;
  const bool within = std::abs(acc - 0.9625) <= 0.05;
  std::printf("[criterion 9] %s handwritten spot check: balanced-test accuracy %.4f, reference band 0.9125..1.0 (non-gating)\n",
              within ? "PASS" : "WARN", acc);
  SUCCEED();
}

// --- 10: identical config+seed implies identical metric payloads -------------
TEST(Acceptance, Determinism) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("mvlt-accept-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);

  std::vector<int> full_counts;
  for (int c : kTrainCounts) full_counts.push_back(c + kTestPerClass);
  const auto raw = make_synthetic_fixture(6, 3, full_counts, kSeparation, kFixtureSeed);
  const std::string manifest = save_dataset(raw, dir.string());

  ExperimentConfig cfg = acceptance_config(5);
  cfg.manifest = manifest;
  cfg.network.epochs = 40;

  const auto train_a = cmd_train(cfg);
  const auto train_b = cmd_train(cfg);
  const bool train_same = metrics_to_json(train_a.report) == metrics_to_json(train_b.report);

  const auto checkpoint =
      make_checkpoint(train_a.model, train_a.dataset_name, train_a.view_dims, cfg);
  const auto retrain_a = cmd_oversample_retrain(cfg, checkpoint);
  const auto retrain_b = cmd_oversample_retrain(cfg, checkpoint);
  const bool retrain_same =
      metrics_to_json(retrain_a.report) == metrics_to_json(retrain_b.report) &&
      metrics_to_json(retrain_a.phase1_report) == metrics_to_json(retrain_b.phase1_report) &&
      retrain_a.pseudo.size() == retrain_b.pseudo.size();

  std::filesystem::remove_all(dir);

  const bool pass = train_same && retrain_same;
  std::printf("[criterion 10] %s determinism: repeated train payloads %s, repeated oversample-retrain payloads %s (%zu pseudo-samples)\n",
              pass ? "PASS" : "FAIL", train_same ? "identical" : "differ",
              retrain_same ? "identical" : "differ", retrain_a.pseudo.size());
  EXPECT_TRUE(train_same);
  EXPECT_TRUE(retrain_same);
}

}  // namespace
}  // namespace mvlt
