#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvlt/checkpoint.hpp"
#include "mvlt/config.hpp"
#include "mvlt/dataset.hpp"
#include "mvlt/errors.hpp"
#include "mvlt/experiment.hpp"
#include "mvlt/report.hpp"
#include "mvlt/rng.hpp"

using namespace mvlt;

namespace {

class WallClock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// Every experiment field as a CLI option. A config file loads first, options
// the user actually passed override it.
struct ConfigCli {
  ExperimentConfig v;
  std::string config_path;

  CLI::Option* manifest = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* split_fraction = nullptr;
  CLI::Option* hidden = nullptr;
  CLI::Option* hidden_per_view = nullptr;
  CLI::Option* epochs = nullptr;
  CLI::Option* step_size = nullptr;
  CLI::Option* batch_size = nullptr;
  CLI::Option* optimizer = nullptr;
  CLI::Option* early_stop = nullptr;
  CLI::Option* anneal_epochs = nullptr;
  CLI::Option* per_view_terms = nullptr;
  CLI::Option* reduction = nullptr;
  CLI::Option* neighbors = nullptr;
  CLI::Option* transform = nullptr;
  CLI::Option* target = nullptr;
  CLI::Option* ablation = nullptr;
  CLI::Option* long_tail = nullptr;
  CLI::Option* eta = nullptr;
  CLI::Option* decay_form = nullptr;
  CLI::Option* noise_kind = nullptr;
  CLI::Option* sigma = nullptr;
  CLI::Option* fraction = nullptr;
  CLI::Option* clip = nullptr;
  CLI::Option* base_rates = nullptr;
  CLI::Option* warm_start = nullptr;
  CLI::Option* report = nullptr;

  void add_to(CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override its fields");
    manifest = sub->add_option("--manifest", v.manifest, "dataset manifest path");
    seed = sub->add_option("--seed", v.seed, "master seed");
    split_fraction =
        sub->add_option("--split-fraction", v.split_fraction, "train fraction of the split");
    hidden = sub->add_option("--hidden", v.network.hidden, "hidden width for every view");
    hidden_per_view = sub->add_option("--hidden-per-view", v.network.hidden_per_view,
                                      "per-view hidden widths")
                          ->delimiter(',');
    epochs = sub->add_option("--epochs", v.network.epochs, "training epochs");
    step_size = sub->add_option("--step-size", v.network.step_size, "optimizer step size");
    batch_size = sub->add_option("--batch-size", v.network.batch_size, "mini-batch size");
    optimizer = sub->add_option("--optimizer", v.network.optimizer, "adam or gradient-descent");
    early_stop = sub->add_flag("--early-stop,!--no-early-stop", v.network.early_stop,
                               "stop when the loss plateaus");
    anneal_epochs = sub->add_option("--anneal-epochs", v.loss.anneal_epochs,
                                    "epochs to ramp the KL weight to 1");
    per_view_terms = sub->add_flag("--per-view-terms,!--no-per-view-terms", v.loss.per_view_terms,
                                   "add one loss term per view");
    reduction = sub->add_option("--reduction", v.loss.reduction, "batch reduction: mean or sum");
    neighbors = sub->add_option("--neighbors,-R", v.oversample.r,
                                "neighbor count for oversampling");
    transform = sub->add_option("--transform", v.oversample.transform,
                                "entropy-to-weight transform (inverse)");
    target = sub->add_option("--target", v.oversample.target,
                             "per-class target count: max or an integer");
    ablation = sub->add_option("--ablation", v.oversample.ablation,
                               "full, v1-no-oversample, or v2-random-weights");
    long_tail = sub->add_flag("--long-tail,!--no-long-tail", v.long_tail.apply,
                              "subsample the train split into a long tail");
    eta = sub->add_option("--eta", v.long_tail.eta, "decay rate of the long tail");
    decay_form = sub->add_option("--decay-form", v.long_tail.decay_form,
                                 "normalized-exponent or geometric-per-class");
    noise_kind = sub->add_option("--noise-kind", v.noise.kind, "none, gaussian, or conflictive");
    sigma = sub->add_option("--sigma", v.noise.sigma, "gaussian noise deviation");
    fraction = sub->add_option("--fraction", v.noise.fraction, "conflictive sample fraction");
    clip = sub->add_option("--clip", v.noise.clip,
                           "eval-time outlier shrinkage: rows beyond clip*sqrt(dim) are "
                           "scaled by (cap/norm)^2; 0 disables");
    base_rates = sub->add_option("--base-rates", v.base_rates, "per-class base rates")
                     ->delimiter(',');
    warm_start = sub->add_flag("--warm-start,!--no-warm-start", v.retrain_warm_start,
                               "retrain from the phase-1 parameters");
    report = sub->add_option("--report", v.report_path, "report output path");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig out = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (manifest->count()) out.manifest = v.manifest;
    if (seed->count()) out.seed = v.seed;
    if (split_fraction->count()) out.split_fraction = v.split_fraction;
    if (hidden->count()) out.network.hidden = v.network.hidden;
    if (hidden_per_view->count()) out.network.hidden_per_view = v.network.hidden_per_view;
    if (epochs->count()) out.network.epochs = v.network.epochs;
    if (step_size->count()) out.network.step_size = v.network.step_size;
    if (batch_size->count()) out.network.batch_size = v.network.batch_size;
    if (optimizer->count()) out.network.optimizer = v.network.optimizer;
    if (early_stop->count()) out.network.early_stop = v.network.early_stop;
    if (anneal_epochs->count()) out.loss.anneal_epochs = v.loss.anneal_epochs;
    if (per_view_terms->count()) out.loss.per_view_terms = v.loss.per_view_terms;
    if (reduction->count()) out.loss.reduction = v.loss.reduction;
    if (neighbors->count()) out.oversample.r = v.oversample.r;
    if (transform->count()) out.oversample.transform = v.oversample.transform;
    if (target->count()) out.oversample.target = v.oversample.target;
    if (ablation->count()) out.oversample.ablation = v.oversample.ablation;
    if (long_tail->count()) out.long_tail.apply = v.long_tail.apply;
    if (eta->count()) out.long_tail.eta = v.long_tail.eta;
    if (decay_form->count()) out.long_tail.decay_form = v.long_tail.decay_form;
    if (noise_kind->count()) out.noise.kind = v.noise.kind;
    if (sigma->count()) out.noise.sigma = v.noise.sigma;
    if (fraction->count()) out.noise.fraction = v.noise.fraction;
    if (clip->count()) out.noise.clip = v.noise.clip;
    if (base_rates->count()) out.base_rates = v.base_rates;
    if (warm_start->count()) out.retrain_warm_start = v.retrain_warm_start;
    if (report->count()) out.report_path = v.report_path;
    validate_config(out);
    return out;
  }
};

std::string report_dir() {
  const char* dir = std::getenv("MVLT_REPORT_DIR");
  return dir && *dir ? dir : ".";
}

std::string resolve_report_path(const ExperimentConfig& cfg, const std::string& kind) {
  if (!cfg.report_path.empty()) return cfg.report_path;
  return report_dir() + "/" + kind + "-report.json";
}

std::string default_checkpoint_path(const std::string& kind) {
  return report_dir() + "/" + kind + "-checkpoint.json";
}

void require_manifest(const ExperimentConfig& cfg) {
  if (cfg.manifest.empty()) throw ConfigError("no dataset manifest given");
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
}

void run_train(const ConfigCli& cli, const std::string& checkpoint_out) {
  const WallClock clock;
  const ExperimentConfig cfg = cli.resolve();
  require_manifest(cfg);

  const TrainOutcome out = cmd_train(cfg);
  const std::string ckpt =
      checkpoint_out.empty() ? default_checkpoint_path("train") : checkpoint_out;
  save_checkpoint(make_checkpoint(out.model, out.dataset_name, out.view_dims, cfg), ckpt);

  nlohmann::json doc = report_document(out.report, cfg, clock.seconds());
  doc["kind"] = "train";
  const std::string report_path = resolve_report_path(cfg, "train");
  write_report(doc, report_path);

  print_warnings(out.report.warnings);
  std::cout << format_report_table(out.report);
  std::cout << "\ncheckpoint: " << ckpt << "\nreport: " << report_path << '\n';
}

std::string export_pseudo(const RetrainOutcome& out, const ModelCheckpoint& checkpoint,
                          const std::string& dir) {
  MultiViewDataset ds;
  ds.name = out.dataset_name + "-pseudo";
  ds.num_classes = checkpoint.num_classes;
  ds.views.resize(checkpoint.view_dims.size());
  for (std::size_t v = 0; v < checkpoint.view_dims.size(); ++v) {
    ds.views[v].dim = checkpoint.view_dims[v];
  }
  for (const PseudoSample& s : out.pseudo) {
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
      ds.views[v].values.insert(ds.views[v].values.end(), s.per_view_features[v].begin(),
                                s.per_view_features[v].end());
    }
    ds.labels.push_back(s.label);
  }
  const std::string manifest = save_dataset(ds, dir);

  std::ofstream prov(dir + "/" + ds.name + ".provenance.jsonl");
  for (const PseudoSample& s : out.pseudo) {
    nlohmann::json line;
    line["label"] = s.label;
    line["center"] = s.provenance.center;
    line["neighbors"] = s.provenance.neighbors;
    line["weights_per_view"] = s.provenance.weights_per_view;
    prov << line.dump() << '\n';
  }
  return manifest;
}

void run_oversample_retrain(const ConfigCli& cli, const std::string& checkpoint_in,
                            const std::string& checkpoint_out, const std::string& pseudo_out) {
  const WallClock clock;
  const ExperimentConfig cfg = cli.resolve();
  require_manifest(cfg);

  const ModelCheckpoint phase1 = load_checkpoint(checkpoint_in);
  const RetrainOutcome out = cmd_oversample_retrain(cfg, phase1);

  const std::string ckpt =
      checkpoint_out.empty() ? default_checkpoint_path("retrain") : checkpoint_out;
  save_checkpoint(make_checkpoint(out.model, out.dataset_name, out.view_dims, cfg), ckpt);

  nlohmann::json doc = report_document(out.report, cfg, clock.seconds());
  doc["kind"] = "oversample-retrain";
  doc["phase1_metrics"] = metrics_to_json(out.phase1_report);
  const std::string report_path = resolve_report_path(cfg, "retrain");
  write_report(doc, report_path);

  print_warnings(out.report.warnings);
  std::cout << "phase 1:\n" << format_report_table(out.phase1_report);
  std::cout << "\nretrained:\n" << format_report_table(out.report);
  if (!pseudo_out.empty()) {
    if (out.pseudo.empty()) {
      std::cout << "\nno pseudo-samples generated; nothing exported\n";
    } else {
      std::cout << "\npseudo-data: " << export_pseudo(out, phase1, pseudo_out) << '\n';
    }
  }
  std::cout << "\ncheckpoint: " << ckpt << "\nreport: " << report_path << '\n';
}

void run_evaluate(const ConfigCli& cli, const std::string& checkpoint_in,
                  const std::string& eval_split) {
  const WallClock clock;
  const ExperimentConfig cfg = cli.resolve();
  require_manifest(cfg);

  const ModelCheckpoint checkpoint = load_checkpoint(checkpoint_in);
  MultiViewDataset raw = load_dataset(cfg.manifest);
  if (eval_split != "none") {
    SplitResult parts =
        split(raw, cfg.split_fraction, Rng(cfg.seed).derive(seed_tags::kSplit).seed());
    raw = eval_split == "train" ? std::move(parts.train) : std::move(parts.test);
  }

  const MetricsReport report = cmd_evaluate(checkpoint, raw, cfg.noise, cfg.seed);
  nlohmann::json doc = report_document(report, cfg, clock.seconds());
  doc["kind"] = "evaluate";
  const std::string report_path = resolve_report_path(cfg, "evaluate");
  write_report(doc, report_path);

  print_warnings(report.warnings);
  std::cout << format_report_table(report);
  std::cout << "\nreport: " << report_path << '\n';
}

void run_sweep(const ConfigCli& cli, const std::string& parameter,
               const std::vector<double>& values) {
  const WallClock clock;
  const ExperimentConfig cfg = cli.resolve();
  require_manifest(cfg);

  const SweepOutcome out = cmd_sweep(cfg, parameter, values);
  nlohmann::json doc = sweep_document(out, cfg, clock.seconds());
  const std::string report_path = resolve_report_path(cfg, "sweep");
  write_report(doc, report_path);

  print_warnings(out.notices);
  std::cout << format_sweep_table(out);
  std::cout << "\nreport: " << report_path << '\n';
}

void run_dump_evidence(const ConfigCli& cli, const std::string& checkpoint_in, std::string out) {
  const ExperimentConfig cfg = cli.resolve();
  require_manifest(cfg);

  const ModelCheckpoint checkpoint = load_checkpoint(checkpoint_in);
  const MultiViewDataset raw = load_dataset(cfg.manifest);
  if (out.empty()) out = report_dir() + "/evidence.txt";
  cmd_dump_evidence(checkpoint, raw, out);
  std::cout << raw.size() << " rows -> " << out << '\n';
}

void run_make_fixture(int classes, int views, const std::vector<int>& counts, double separation,
                      std::uint64_t seed, const std::vector<int>& dims, const std::string& out_dir,
                      const std::string& name) {
  MultiViewDataset data = make_synthetic_fixture(classes, views, counts, separation, seed, dims);
  data.name = name;
  std::cout << "manifest: " << save_dataset(data, out_dir) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evidential multi-view classification toolkit for long-tailed data"};
  app.require_subcommand(1);

  auto* train_cmd = app.add_subcommand("train", "train phase 1 and score the test split");
  ConfigCli train_cli;
  train_cli.add_to(train_cmd);
  std::string train_ckpt_out;
  train_cmd->add_option("--checkpoint-out", train_ckpt_out, "model checkpoint output path");
  train_cmd->callback([&] { run_train(train_cli, train_ckpt_out); });

  auto* retrain_cmd = app.add_subcommand(
      "oversample-retrain", "balance the train split with pseudo-samples and retrain");
  ConfigCli retrain_cli;
  retrain_cli.add_to(retrain_cmd);
  std::string retrain_ckpt_in, retrain_ckpt_out, pseudo_out;
  retrain_cmd->add_option("--checkpoint", retrain_ckpt_in, "phase-1 checkpoint")->required();
  retrain_cmd->add_option("--checkpoint-out", retrain_ckpt_out, "model checkpoint output path");
  retrain_cmd->add_option("--pseudo-out", pseudo_out, "directory for the pseudo-data export");
  retrain_cmd->callback(
      [&] { run_oversample_retrain(retrain_cli, retrain_ckpt_in, retrain_ckpt_out, pseudo_out); });

  auto* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on a dataset");
  ConfigCli eval_cli;
  eval_cli.add_to(eval_cmd);
  std::string eval_ckpt_in, eval_split = "none";
  eval_cmd->add_option("--checkpoint", eval_ckpt_in, "checkpoint to score")->required();
  eval_cmd->add_option("--split", eval_split, "evaluate the whole set, or one side of the split")
      ->check(CLI::IsMember({"none", "train", "test"}));
  eval_cmd->callback([&] { run_evaluate(eval_cli, eval_ckpt_in, eval_split); });

  auto* sweep_cmd = app.add_subcommand("sweep", "full pipeline once per parameter value");
  ConfigCli sweep_cli;
  sweep_cli.add_to(sweep_cmd);
  std::string sweep_parameter;
  std::vector<double> sweep_values;
  sweep_cmd->add_option("--parameter", sweep_parameter, "R or eta")
      ->required()
      ->check(CLI::IsMember({"R", "eta"}));
  sweep_cmd->add_option("--values", sweep_values, "values to sweep")->required()->delimiter(',');
  sweep_cmd->callback([&] { run_sweep(sweep_cli, sweep_parameter, sweep_values); });

  auto* dump_cmd = app.add_subcommand("dump-evidence",
                                      "write joint evidence, label, uncertainty per sample");
  ConfigCli dump_cli;
  dump_cli.add_to(dump_cmd);
  std::string dump_ckpt_in, dump_out;
  dump_cmd->add_option("--checkpoint", dump_ckpt_in, "checkpoint to apply")->required();
  dump_cmd->add_option("--out", dump_out, "output text file");
  dump_cmd->callback([&] { run_dump_evidence(dump_cli, dump_ckpt_in, dump_out); });

  auto* fixture_cmd = app.add_subcommand("make-fixture", "write a synthetic dataset");
  int fx_classes = 6, fx_views = 3;
  std::vector<int> fx_counts, fx_dims;
  double fx_separation = 4.0;
  std::uint64_t fx_seed = 7;
  std::string fx_out_dir, fx_name = "synthetic";
  fixture_cmd->add_option("--classes", fx_classes, "class count");
  fixture_cmd->add_option("--views", fx_views, "view count");
  fixture_cmd->add_option("--counts", fx_counts, "per-class sample counts")
      ->required()
      ->delimiter(',');
  fixture_cmd->add_option("--separation", fx_separation, "minimum distance between class means");
  fixture_cmd->add_option("--seed", fx_seed, "fixture seed");
  fixture_cmd->add_option("--dims", fx_dims, "per-view feature dimensions")->delimiter(',');
  fixture_cmd->add_option("--out-dir", fx_out_dir, "output directory")->required();
  fixture_cmd->add_option("--name", fx_name, "dataset name");
  fixture_cmd->callback([&] {
    run_make_fixture(fx_classes, fx_views, fx_counts, fx_separation, fx_seed, fx_dims, fx_out_dir,
                     fx_name);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
