#include "chal/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "chal/checkpoint.hpp"
#include "chal/heatmap.hpp"
#include "chal/ioutil.hpp"

using namespace chal;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "chal_experiment_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig synth_cfg(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.synth_per_class = 15;
  cfg.synth_test_per_class = 10;
  cfg.architecture = "dense:8 relu dense:2";
  cfg.train.steps = 30;
  cfg.train.batch_size = 10;
  cfg.train.challenger.top_k = 2;
  cfg.out_dir = out_dir;
  return cfg;
}

// small idx fixture with 4x4 images so attributions have a 2-d layout
ExperimentConfig idx_cfg(const fs::path& data_dir, const std::string& out_dir) {
  Dataset train;
  train.inputs = Tensor({6, 1, 4, 4});
  Rng rng(3);
  for (double& v : train.inputs.values()) {
    v = static_cast<double>(rng.below(256)) / 255.0;
  }
  train.labels = {0, 1, 0, 1, 0, 1};
  train.classes = 2;
  Dataset test = train;
  test.labels = {1, 0, 1, 0, 1, 0};
  test.split = "test";

  ExperimentConfig cfg;
  cfg.data_kind = "idx";
  cfg.idx_train_images = (data_dir / "tri").string();
  cfg.idx_train_labels = (data_dir / "trl").string();
  cfg.idx_test_images = (data_dir / "tei").string();
  cfg.idx_test_labels = (data_dir / "tel").string();
  save_idx(train, cfg.idx_train_images, cfg.idx_train_labels);
  save_idx(test, cfg.idx_test_images, cfg.idx_test_labels);

  cfg.architecture = "flatten dense:8 relu dense:2";
  cfg.train.steps = 20;
  cfg.train.batch_size = 6;
  cfg.train.challenger.top_k = 2;
  cfg.out_dir = out_dir;
  return cfg;
}

std::string slurp(const std::string& path) { return read_text_file(path); }

}  // namespace

TEST_CASE("build_data materializes the synthetic splits") {
  ExperimentConfig cfg = synth_cfg("unused");
  DataBundle data = build_data(cfg);
  CHECK(data.train.size() == 30);
  CHECK(data.test.size() == 20);
  CHECK(data.train.split == "train");
  CHECK(data.test.split == "test");
  CHECK(data.input_shape == std::vector<std::size_t>{2});

  // the two splits come from different streams of the same seed
  bool overlap = false;
  for (std::size_t i = 0; i < data.train.size() && !overlap; ++i) {
    overlap = data.train.inputs.row(i)[0] == data.test.inputs.row(0)[0];
  }
  CHECK(!overlap);

  DataBundle again = build_data(cfg);
  CHECK(again.train.labels == data.train.labels);
  for (std::size_t i = 0; i < data.train.inputs.size(); ++i) {
    CHECK(again.train.inputs[i] == data.train.inputs[i]);
  }

  SUBCASE("tiny_per_class reduces only the training split") {
    cfg.tiny_per_class = 2;
    DataBundle tiny = build_data(cfg);
    CHECK(tiny.train.size() == 4);
    CHECK(tiny.test.size() == 20);
  }
}

TEST_CASE("build_data reads idx pairs and merges the class counts") {
  const fs::path dir = fresh_dir("idx_data");
  ExperimentConfig cfg = idx_cfg(dir, "unused");
  DataBundle data = build_data(cfg);
  CHECK(data.train.size() == 6);
  CHECK(data.test.size() == 6);
  CHECK(data.input_shape == std::vector<std::size_t>{1, 4, 4});
  CHECK(data.train.classes == 2);
  CHECK(data.test.classes == 2);
}

TEST_CASE("cmd_train writes checkpoint, step log and metrics per seed") {
  const fs::path out = fresh_dir("train_one");
  ExperimentConfig cfg = synth_cfg(out.string());
  auto written = cmd_train(cfg, TrainMethod::plain);

  REQUIRE(written.size() == 3);
  CHECK(written[0] == (out / "base_seed1.net").string());
  CHECK(written[1] == (out / "base_seed1_steps.csv").string());
  CHECK(written[2] == (out / "base_metrics.csv").string());
  for (const std::string& path : written) CHECK(fs::exists(path));

  Network net = load_checkpoint(written[0]);
  CHECK(net.input_shape() == std::vector<std::size_t>{2});

  const std::string steps = slurp(written[1]);
  CHECK(steps.rfind("step,loss,rank_k,modified_sample_indices\n", 0) == 0);

  const std::string metrics = slurp(written[2]);
  CHECK(metrics.rfind("# config=", 0) == 0);
  CHECK(metrics.find(" method=base\n") != std::string::npos);
  CHECK(metrics.find("seed,accuracy,nll,brier,ece,cosine_overall") !=
        std::string::npos);
  CHECK(metrics.find("\n1,") != std::string::npos);
}

TEST_CASE("cmd_train covers every seed then aggregates") {
  const fs::path out = fresh_dir("train_many");
  ExperimentConfig cfg = synth_cfg(out.string());
  cfg.seeds = {1, 2, 3};
  auto written = cmd_train(cfg, TrainMethod::challenger);
  REQUIRE(written.size() == 7);  // (checkpoint + steps) per seed + metrics
  CHECK(fs::exists(out / "challenger_seed2.net"));
  CHECK(fs::exists(out / "challenger_seed3_steps.csv"));

  const std::string metrics = slurp((out / "challenger_metrics.csv").string());
  std::size_t lines = 0;
  for (char ch : metrics) lines += ch == '\n' ? 1 : 0;
  CHECK(lines == 5);  // provenance + header + one row per seed
}

TEST_CASE("rerunning one config overwrites with identical bytes") {
  const fs::path out = fresh_dir("rerun");
  ExperimentConfig cfg = synth_cfg(out.string());
  auto files = cmd_train(cfg, TrainMethod::challenger);
  std::vector<std::string> first;
  for (const std::string& path : files) {
    std::ifstream in(path, std::ios::binary);
    first.emplace_back(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
  }
  auto again = cmd_train(cfg, TrainMethod::challenger);
  REQUIRE(again == files);
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::ifstream in(files[i], std::ios::binary);
    const std::string second((std::istreambuf_iterator<char>(in)), {});
    CHECK(second == first[i]);
  }
}

TEST_CASE("cmd_evaluate scores a checkpoint on the test split") {
  const fs::path out = fresh_dir("evaluate");
  ExperimentConfig cfg = synth_cfg(out.string());
  auto trained = cmd_train(cfg, TrainMethod::plain);
  auto written = cmd_evaluate(cfg, trained[0]);
  REQUIRE(written.size() == 1);
  const std::string text = slurp(written[0]);
  CHECK(text.rfind("# config=", 0) == 0);
  CHECK(text.find("checkpoint=base_seed1.net") != std::string::npos);
  CHECK(text.find("accuracy,nll,brier,ece") != std::string::npos);

  SUBCASE("input shape mismatches are rejected") {
    ExperimentConfig wide = cfg;
    wide.synth_dim = 3;
    CHECK_THROWS_WITH_AS(cmd_evaluate(wide, trained[0]),
                         doctest::Contains("input"), std::invalid_argument);
  }
}

TEST_CASE("cmd_sweep_topk validates the pool sizes before training") {
  const fs::path out = fresh_dir("sweep");
  ExperimentConfig cfg = synth_cfg(out.string());
  CHECK_THROWS_WITH_AS(cmd_sweep_topk(cfg, {1, 5}), doctest::Contains("k 5"),
                       std::invalid_argument);
  CHECK(!fs::exists(out / "sweep_topk.csv"));  // failed before any run
  CHECK_THROWS_AS(cmd_sweep_topk(cfg, {}), std::invalid_argument);

  cfg.seeds = {1, 2};
  auto written = cmd_sweep_topk(cfg, {1, 2});
  REQUIRE(written.size() == 1);
  const std::string text = slurp(written[0]);
  CHECK(text.find("top_k,seed,accuracy") != std::string::npos);
  std::size_t lines = 0;
  for (char ch : text) lines += ch == '\n' ? 1 : 0;
  CHECK(lines == 6);  // provenance + header + 2 ks x 2 seeds
}

TEST_CASE("cmd_attribute writes an image and csv per sample") {
  const fs::path data = fresh_dir("attr_data");
  const fs::path out = fresh_dir("attr_out");
  ExperimentConfig cfg = idx_cfg(data, out.string());
  auto trained = cmd_train(cfg, TrainMethod::plain);

  auto written = cmd_attribute(cfg, trained[0], {0, 1, 2}, "target");
  REQUIRE(written.size() == 6);
  CHECK(written[0] == (out / "attribution_sample0.pgm").string());
  CHECK(written[1] == (out / "attribution_sample0.csv").string());
  CHECK(fs::exists(out / "attribution_sample2.pgm"));

  CHECK(slurp(written[0]).rfind("P2\n", 0) == 0);
  Tensor grid = read_heatmap_csv(written[1]);
  CHECK(grid.shape() == std::vector<std::size_t>{4, 4});

  SUBCASE("reruns are byte-identical") {
    const std::string before = slurp(written[1]);
    cmd_attribute(cfg, trained[0], {0, 1, 2}, "target");
    CHECK(slurp(written[1]) == before);
  }
  SUBCASE("rank mode picks per-sample classes") {
    auto ranked = cmd_attribute(cfg, trained[0], {0}, "rank:2");
    CHECK(ranked.size() == 2);
  }
  SUBCASE("bad arguments are rejected") {
    CHECK_THROWS_AS(cmd_attribute(cfg, trained[0], {}, "target"),
                    std::invalid_argument);
    CHECK_THROWS_AS(cmd_attribute(cfg, trained[0], {0}, "rank:0"),
                    std::invalid_argument);
    CHECK_THROWS_AS(cmd_attribute(cfg, trained[0], {0}, "top"),
                    std::invalid_argument);
    CHECK_THROWS_AS(cmd_attribute(cfg, trained[0], {99}, "target"),
                    std::invalid_argument);
  }
}

TEST_CASE("cmd_compare aggregates methods over the shared seeds") {
  const fs::path out = fresh_dir("compare");
  ExperimentConfig cfg = synth_cfg(out.string());
  cfg.seeds = {1, 2};
  CHECK_THROWS_AS(cmd_compare(cfg, {TrainMethod::plain}),
                  std::invalid_argument);

  auto written =
      cmd_compare(cfg, {TrainMethod::plain, TrainMethod::challenger});
  REQUIRE(written.size() == 1);
  const std::string text = slurp(written[0]);
  CHECK(text.find("method,accuracy_mean,accuracy_std") != std::string::npos);
  CHECK(text.find("\nbase,") != std::string::npos);
  CHECK(text.find("\nchallenger,") != std::string::npos);

  auto again =
      cmd_compare(cfg, {TrainMethod::plain, TrainMethod::challenger});
  CHECK(slurp(again[0]) == text);
}
