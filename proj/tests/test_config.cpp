#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "deeprepair/config.hpp"
#include "deeprepair/errors.hpp"
#include "deeprepair/report.hpp"

using namespace deeprepair;
namespace fs = std::filesystem;

TEST_CASE("defaults are valid") {
  const PipelineConfig cfg = default_config();
  CHECK(cfg.arch == "tiny");
  CHECK(cfg.corruption == "GN");
  CHECK(cfg.strategy == "clustering");
  CHECK(cfg.methods == std::vector<std::string>{"style-repair"});
  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("parse fills unset fields from the defaults") {
  const PipelineConfig cfg = parse_config(R"({
    "model": {"arch": "allconv"},
    "corruption": {"kind": "SN"},
    "train": {"repair": {"lambda": 6.0, "max_epochs": 4}}
  })");
  CHECK(cfg.arch == "allconv");
  CHECK(cfg.corruption == "SN");
  CHECK(cfg.repair_train.lambda == 6.0);
  CHECK(cfg.repair_train.max_epochs == 4);
  // untouched fields keep their defaults
  CHECK(cfg.repair_train.momentum == default_config().repair_train.momentum);
  CHECK(cfg.base_train.lr == default_config().base_train.lr);
  CHECK(cfg.guidance_count == default_config().guidance_count);
}

TEST_CASE("empty document equals the defaults") {
  CHECK(canonical_config(parse_config("{}")) ==
        canonical_config(default_config()));
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(parse_config(R"({"modell": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"model": {"archh": "tiny"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"train": {"base": {"lrr": 0.1}}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sampler": {"clusters": 5}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("not json at all"), ConfigError);
}

TEST_CASE("save and load round trip") {
  PipelineConfig cfg = default_config();
  cfg.arch = "dense";
  cfg.corruption = "JPEG";
  cfg.guidance_count = 123;
  cfg.n_clusters = 7;
  cfg.strategy = "uniform";
  cfg.methods = {"style-repair", "plain", "cutout"};
  cfg.seed = 99;
  cfg.repair_train.lambda = 3.5;
  cfg.fixed_references = true;

  const fs::path path = fs::temp_directory_path() / "dr_cfg.json";
  save_config(path, cfg);
  const PipelineConfig back = load_config(path);
  CHECK(canonical_config(back) == canonical_config(cfg));
  CHECK(back.methods == cfg.methods);
  CHECK(back.seed == 99);
  CHECK(back.repair_train.lambda == 3.5);
  CHECK(back.fixed_references);
  CHECK_THROWS_AS(load_config(fs::temp_directory_path() / "dr_cfg_nope.json"),
                  LoadError);
}

TEST_CASE("canonical form is stable and drives the hash") {
  PipelineConfig a = default_config();
  PipelineConfig b = default_config();
  CHECK(canonical_config(a) == canonical_config(b));
  CHECK(config_hash_hex(canonical_config(a)) ==
        config_hash_hex(canonical_config(b)));
  b.seed = 2;
  CHECK(canonical_config(a) != canonical_config(b));
  CHECK(config_hash_hex(canonical_config(a)) !=
        config_hash_hex(canonical_config(b)));
}

TEST_CASE("cross-field validation") {
  PipelineConfig cfg = default_config();
  cfg.corruption = "ZZ";
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = default_config();
  cfg.arch = "vgg";
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = default_config();
  cfg.strategy = "fancy";
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = default_config();
  cfg.methods = {"style-repair", "distill"};
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = default_config();
  cfg.n_clusters = 0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = default_config();
  cfg.n_style_ops = -1;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = default_config();
  cfg.repair_train.lambda = -1.0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = default_config();
  cfg.style_backend = "vgg";
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = default_config();
  cfg.synth_train = 0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}
