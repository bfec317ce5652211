#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "deeprepair/config.hpp"
#include "deeprepair/errors.hpp"
#include "deeprepair/pipeline.hpp"
#include "deeprepair/report.hpp"

using namespace deeprepair;
namespace fs = std::filesystem;

namespace {

PipelineConfig quick_config(const fs::path& root, std::uint64_t seed) {
  PipelineConfig cfg = default_config();
  cfg.data_dir = root / "data";
  cfg.out_dir = root / "out";
  cfg.synth_train = 256;
  cfg.synth_test = 64;
  cfg.guidance_count = 40;
  cfg.n_clusters = 3;
  cfg.n_style_ops = 2;
  cfg.seed = seed;
  cfg.base_train.max_epochs = 2;
  cfg.base_train.batch_size = 64;
  cfg.repair_train.max_epochs = 1;
  cfg.repair_train.batch_size = 64;
  cfg.repair_train.lr = 0.01;
  cfg.methods = {"style-repair"};
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DEEPREPAIR_CLI_PATH) + " " + args +
                          " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

}  // namespace

TEST_CASE("stages demand their prerequisites with actionable errors") {
  const fs::path root = fs::temp_directory_path() / "dr_pipe_order";
  fs::remove_all(root);
  Pipeline p(quick_config(root, 1));

  auto expect_mentions = [&](auto&& stage_fn, const std::string& needed) {
    try {
      stage_fn();
      FAIL_CHECK("expected a LoadError mentioning " << needed);
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find(needed) != std::string::npos);
    }
  };

  expect_mentions([&] { p.train_base(); }, "prepare-data");
  expect_mentions([&] { p.collect_failures(); }, "train-base");
  expect_mentions([&] { p.fit_sampler(); }, "collect-failures");
  expect_mentions([&] { p.repair(); }, "train-base");
  expect_mentions([&] { p.evaluate(); }, "train-base");
  expect_mentions([&] { p.report(); }, "evaluate");

  // with the early stages done, the later requirements surface
  p.prepare_data();
  p.train_base();
  p.collect_failures();
  expect_mentions([&] { p.repair(); }, "fit-sampler");
  expect_mentions([&] { p.evaluate(); }, "repair");
}

TEST_CASE("config drift is detected unless forced") {
  const fs::path root = fs::temp_directory_path() / "dr_pipe_drift";
  fs::remove_all(root);
  PipelineConfig cfg = quick_config(root, 1);
  Pipeline first(cfg);
  first.prepare_data();
  CHECK(fs::exists(first.config_path()));

  PipelineConfig drifted = cfg;
  drifted.guidance_count = 41;
  try {
    Pipeline second(drifted);
    second.prepare_data();
    FAIL_CHECK("expected ConfigError on drifted config");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("--force") != std::string::npos);
  }

  Pipeline forced(drifted, /*force=*/true);
  CHECK_NOTHROW(forced.prepare_data());

  // the same config never counts as drift
  Pipeline again(cfg, /*force=*/true);
  again.prepare_data();
  Pipeline same(cfg);
  CHECK_NOTHROW(same.prepare_data());
}

TEST_CASE("cli runs the full pipeline and is seed deterministic") {
  const fs::path root = fs::temp_directory_path() / "dr_pipe_cli";
  fs::remove_all(root);
  fs::create_directories(root);

  auto write_cfg = [&](const std::string& tag, std::uint64_t seed) {
    PipelineConfig cfg = quick_config(root / tag, seed);
    fs::create_directories(root / tag);
    const fs::path path = root / (tag + ".json");
    save_config(path, cfg);
    return path;
  };

  const fs::path cfg_a = write_cfg("a", 7);
  const fs::path cfg_b = write_cfg("b", 7);
  const fs::path cfg_c = write_cfg("c", 8);

  REQUIRE(run_cli("-c " + q(cfg_a) + " run-all") == 0);
  REQUIRE(run_cli("-c " + q(cfg_b) + " run-all") == 0);
  REQUIRE(run_cli("-c " + q(cfg_c) + " run-all") == 0);

  const fs::path res_a = root / "a" / "out" / "results.csv";
  const fs::path res_b = root / "b" / "out" / "results.csv";
  const fs::path res_c = root / "c" / "out" / "results.csv";
  REQUIRE(fs::exists(res_a));
  REQUIRE(fs::exists(res_b));
  REQUIRE(fs::exists(res_c));

  CHECK(slurp(res_a) == slurp(res_b));  // byte-identical under equal seeds
  CHECK(slurp(res_a) != slurp(res_c));

  // artifacts of every stage are present
  const fs::path out = root / "a" / "out";
  CHECK(fs::exists(out / "base.ckpt"));
  CHECK(fs::exists(out / "failures.json"));
  CHECK(fs::exists(out / "sampler.json"));
  CHECK(fs::exists(out / "repaired-style-repair.ckpt"));
  CHECK(fs::exists(out / "report" / "results.csv"));
  CHECK(fs::exists(out / "report" / "plots" / "method_accuracy.png"));

  // rows parse and cover base + repaired models
  const std::vector<ResultRow> rows = read_results_csv(res_a);
  bool saw_base = false, saw_repair = false;
  for (const ResultRow& r : rows) {
    if (r.method == "base") saw_base = true;
    if (r.method == "style-repair") saw_repair = true;
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    CHECK(r.config_hash.size() == 16);
  }
  CHECK(saw_base);
  CHECK(saw_repair);
}

TEST_CASE("cli rejects a bad invocation") {
  CHECK(run_cli("no-such-stage") != 0);
  CHECK(run_cli("-c /nonexistent/cfg.json run-all") != 0);
}
