#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvlt/dataset.hpp"

#ifndef MVLT_CLI_PATH
#error "MVLT_CLI_PATH must point at the built command line binary"
#endif

namespace mvlt {
namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mvlt_cli_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str(const std::string& rel = "") const { return (path_ / rel).string(); }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const TempDir& dir) {
  static int counter = 0;
  const std::string log = dir.str("cli_log_" + std::to_string(counter++) + ".txt");
  const std::string cmd = std::string(MVLT_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  result.output.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return result;
}

std::string write_fixture(const TempDir& dir) {
  const MultiViewDataset data = make_synthetic_fixture(3, 2, {30, 30, 30}, 6.0, 99, {4, 3});
  return save_dataset(data, dir.str("data"));
}

// Flags shared by the deterministic train/retrain invocations.
std::string base_flags(const std::string& manifest) {
  return "--manifest " + manifest +
         " --seed 5 --hidden 8 --epochs 12 --batch-size 16 --anneal-epochs 5 -R 2";
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << path;
  nlohmann::json j;
  in >> j;
  return j;
}

TEST(Cli, TrainWritesReportAndCheckpoint) {
  TempDir dir;
  const std::string manifest = write_fixture(dir);
  const std::string report = dir.str("train.json");
  const std::string ckpt = dir.str("ck.json");

  const CliResult res = run_cli("train " + base_flags(manifest) + " --report " + report +
                                    " --checkpoint-out " + ckpt,
                                dir);
  ASSERT_EQ(res.exit_code, 0) << res.output;

  const nlohmann::json doc = load_json(report);
  EXPECT_EQ(doc.at("kind"), "train");
  EXPECT_EQ(doc.at("schema_version"), 1);
  EXPECT_EQ(doc.at("metrics").at("phase"), "train");
  EXPECT_EQ(doc.at("config").at("seed"), 5);
  EXPECT_TRUE(doc.contains("wall_clock_seconds"));
  EXPECT_TRUE(std::filesystem::exists(ckpt));
}

TEST(Cli, MissingManifestFileIsDataError) {
  TempDir dir;
  const CliResult res =
      run_cli("train --manifest " + dir.str("absent/nothing.manifest.json"), dir);
  EXPECT_EQ(res.exit_code, 3) << res.output;
}

TEST(Cli, CorruptManifestIsDataError) {
  TempDir dir;
  const std::string bad = dir.str("bad.manifest.json");
  std::ofstream(bad) << "{not json";
  const CliResult res = run_cli("train --manifest " + bad, dir);
  EXPECT_EQ(res.exit_code, 3) << res.output;
}

TEST(Cli, MissingManifestFlagIsConfigError) {
  TempDir dir;
  const CliResult res = run_cli("train --seed 5", dir);
  EXPECT_EQ(res.exit_code, 2) << res.output;
}

TEST(Cli, InvalidFlagValueIsConfigError) {
  TempDir dir;
  const std::string manifest = write_fixture(dir);
  const CliResult res = run_cli("train --manifest " + manifest + " --epochs -3", dir);
  EXPECT_EQ(res.exit_code, 2) << res.output;
}

TEST(Cli, UnknownFlagIsConfigError) {
  TempDir dir;
  const CliResult res = run_cli("train --no-such-flag", dir);
  EXPECT_EQ(res.exit_code, 2) << res.output;
}

TEST(Cli, NegativeClipIsConfigError) {
  TempDir dir;
  const std::string manifest = write_fixture(dir);
  const CliResult res = run_cli("train --manifest " + manifest + " --clip -1", dir);
  EXPECT_EQ(res.exit_code, 2) << res.output;
}

TEST(Cli, RetrainExportsPseudoData) {
  TempDir dir;
  const std::string manifest = write_fixture(dir);
  const std::string ckpt = dir.str("ck.json");
  ASSERT_EQ(run_cli("train " + base_flags(manifest) + " --report " + dir.str("t.json") +
                        " --checkpoint-out " + ckpt,
                    dir)
                .exit_code,
            0);

  const std::string report = dir.str("retrain.json");
  const std::string pseudo_dir = dir.str("pseudo");
  const CliResult res =
      run_cli("oversample-retrain " + base_flags(manifest) + " --checkpoint " + ckpt +
                  " --report " + report + " --checkpoint-out " + dir.str("ck2.json") +
                  " --pseudo-out " + pseudo_dir,
              dir);
  ASSERT_EQ(res.exit_code, 0) << res.output;

  const nlohmann::json doc = load_json(report);
  EXPECT_EQ(doc.at("kind"), "oversample-retrain");
  EXPECT_EQ(doc.at("metrics").at("phase"), "retrained");
  EXPECT_TRUE(doc.contains("phase1_metrics"));

  int pseudo_total = 0;
  for (const auto& c : doc.at("metrics").at("pseudo_counts_per_class")) {
    pseudo_total += c.get<int>();
  }
  ASSERT_GT(pseudo_total, 0);

  // The export loads back as a dataset with exactly the pseudo rows, plus a
  // provenance line per row.
  const MultiViewDataset pseudo = load_dataset(pseudo_dir + "/fixture-pseudo.manifest.json");
  EXPECT_EQ(pseudo.size(), pseudo_total);
  std::ifstream prov(pseudo_dir + "/fixture-pseudo.provenance.jsonl");
  ASSERT_TRUE(prov.good());
  int lines = 0;
  std::string line;
  while (std::getline(prov, line)) {
    if (!line.empty()) ++lines;
  }
  EXPECT_EQ(lines, pseudo_total);
}

TEST(Cli, IdenticalRunsProduceIdenticalPayloads) {
  TempDir dir;
  const std::string manifest = write_fixture(dir);

  // The resolved config embeds report_path, which necessarily differs between
  // the two runs; determinism is about the scored payloads.
  auto payload = [&](const std::string& report_path) {
    const nlohmann::json doc = load_json(report_path);
    nlohmann::json subset;
    subset["kind"] = doc.at("kind");
    subset["metrics"] = doc.at("metrics");
    if (doc.contains("phase1_metrics")) subset["phase1_metrics"] = doc.at("phase1_metrics");
    return subset.dump();
  };

  const std::string flags = base_flags(manifest);
  ASSERT_EQ(run_cli("train " + flags + " --report " + dir.str("a.json") + " --checkpoint-out " +
                        dir.str("cka.json"),
                    dir)
                .exit_code,
            0);
  ASSERT_EQ(run_cli("train " + flags + " --report " + dir.str("b.json") + " --checkpoint-out " +
                        dir.str("ckb.json"),
                    dir)
                .exit_code,
            0);
  EXPECT_EQ(payload(dir.str("a.json")), payload(dir.str("b.json")));

  ASSERT_EQ(run_cli("oversample-retrain " + flags + " --checkpoint " + dir.str("cka.json") +
                        " --report " + dir.str("ra.json"),
                    dir)
                .exit_code,
            0);
  ASSERT_EQ(run_cli("oversample-retrain " + flags + " --checkpoint " + dir.str("ckb.json") +
                        " --report " + dir.str("rb.json"),
                    dir)
                .exit_code,
            0);
  EXPECT_EQ(payload(dir.str("ra.json")), payload(dir.str("rb.json")));
}

TEST(Cli, EvaluateTestSplitMatchesTrainReport) {
  TempDir dir;
  const std::string manifest = write_fixture(dir);
  const std::string ckpt = dir.str("ck.json");
  ASSERT_EQ(run_cli("train " + base_flags(manifest) + " --report " + dir.str("train.json") +
                        " --checkpoint-out " + ckpt,
                    dir)
                .exit_code,
            0);

  const CliResult res = run_cli("evaluate " + base_flags(manifest) + " --checkpoint " + ckpt +
                                    " --split test --report " + dir.str("eval.json"),
                                dir);
  ASSERT_EQ(res.exit_code, 0) << res.output;

  const nlohmann::json train_doc = load_json(dir.str("train.json"));
  const nlohmann::json eval_doc = load_json(dir.str("eval.json"));
  EXPECT_EQ(eval_doc.at("kind"), "evaluate");
  EXPECT_EQ(eval_doc.at("metrics").at("phase"), "evaluate");
  EXPECT_EQ(eval_doc.at("metrics").at("overall_accuracy"),
            train_doc.at("metrics").at("overall_accuracy"));
  EXPECT_EQ(eval_doc.at("metrics").at("mean_uncertainty"),
            train_doc.at("metrics").at("mean_uncertainty"));
}

TEST(Cli, SweepReportsEveryRow) {
  TempDir dir;
  const std::string manifest = write_fixture(dir);
  const std::string report = dir.str("sweep.json");
  const CliResult res = run_cli("sweep " + base_flags(manifest) +
                                    " --parameter R --values 2,2,3 --report " + report,
                                dir);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  EXPECT_NE(res.output.find("duplicate"), std::string::npos);

  const nlohmann::json doc = load_json(report);
  EXPECT_EQ(doc.at("kind"), "sweep");
  EXPECT_EQ(doc.at("rows").size(), 2u);
}

TEST(Cli, MakeFixtureRoundTrips) {
  TempDir dir;
  const CliResult res = run_cli(
      "make-fixture --classes 3 --views 2 --counts 10,10,10 --dims 4,3 --separation 6 --seed 99 "
      "--out-dir " +
          dir.str("fx") + " --name probe",
      dir);
  ASSERT_EQ(res.exit_code, 0) << res.output;

  const MultiViewDataset loaded = load_dataset(dir.str("fx/probe.manifest.json"));
  EXPECT_EQ(loaded.size(), 30);
  EXPECT_EQ(loaded.num_classes, 3);
  EXPECT_EQ(loaded.view_dims(), (std::vector<int>{4, 3}));

  // Same generator as the library fixture with matching arguments.
  const MultiViewDataset direct = make_synthetic_fixture(3, 2, {10, 10, 10}, 6.0, 99, {4, 3});
  EXPECT_EQ(loaded.labels, direct.labels);
  EXPECT_EQ(loaded.views[0].values, direct.views[0].values);
}

TEST(Cli, DumpEvidenceWritesRows) {
  TempDir dir;
  const std::string manifest = write_fixture(dir);
  const std::string ckpt = dir.str("ck.json");
  ASSERT_EQ(run_cli("train " + base_flags(manifest) + " --report " + dir.str("t.json") +
                        " --checkpoint-out " + ckpt,
                    dir)
                .exit_code,
            0);

  const std::string out = dir.str("evidence.txt");
  const CliResult res = run_cli("dump-evidence " + base_flags(manifest) + " --checkpoint " + ckpt +
                                    " --out " + out,
                                dir);
  ASSERT_EQ(res.exit_code, 0) << res.output;

  std::ifstream in(out);
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 90);
}

TEST(Cli, ConfigFileAndFlagOverrides) {
  TempDir dir;
  const std::string manifest = write_fixture(dir);
  const std::string config_path = dir.str("config.json");
  {
    nlohmann::json cfg;
    cfg["manifest"] = manifest;
    cfg["seed"] = 5;
    cfg["network"] = {{"hidden", 8}, {"epochs", 12}, {"batch_size", 16}};
    cfg["loss"] = {{"anneal_epochs", 5}};
    cfg["oversample"] = {{"R", 2}};
    std::ofstream(config_path) << cfg.dump(2);
  }

  // Flags win over config fields: seed 6 from the flag, the rest from file.
  const std::string report = dir.str("cfgrun.json");
  const CliResult res = run_cli("train --config " + config_path + " --seed 6 --report " + report +
                                    " --checkpoint-out " + dir.str("ck.json"),
                                dir);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  const nlohmann::json doc = load_json(report);
  EXPECT_EQ(doc.at("config").at("seed"), 6);
  EXPECT_EQ(doc.at("config").at("network").at("hidden"), 8);
}

}  // namespace
}  // namespace mvlt
