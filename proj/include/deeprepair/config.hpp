// Pipeline configuration: JSON-backed with defaults, strict unknown-key
// rejection, and a canonical serialization used for the config hash.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "deeprepair/trainer.hpp"

namespace deeprepair {

struct PipelineConfig {
  // data
  std::filesystem::path data_dir = "data";
  int synth_train = 10000;
  int synth_test = 2000;

  // model
  std::string arch = "tiny";

  // failure pattern under repair
  std::string corruption = "GN";
  std::filesystem::path ingest_dir;  // NPY dir for ingestion-only kinds

  // failure collection
  std::size_t guidance_count = 200;

  // sampler
  int n_clusters = 5;
  std::string strategy = "clustering";  // clustering | uniform

  // style operations
  std::string style_backend = "moment";  // moment | feature
  std::filesystem::path style_asset;
  bool fixed_references = false;
  int n_style_ops = 5;

  // training
  TrainConfig base_train;
  TrainConfig repair_train;

  // comparison arms to run in the repair stage
  std::vector<std::string> methods = {"style-repair"};

  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
};

PipelineConfig default_config();

// Parses JSON, filling unset fields from the defaults.  Unknown keys
// anywhere in the document throw ConfigError.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& json_text);

void save_config(const std::filesystem::path& path,
                 const PipelineConfig& cfg);

// Stable key-ordered serialization; equal configs hash equal.
std::string canonical_config(const PipelineConfig& cfg);

// Cross-field validation (known corruption code, method names, ranges).
void validate_config(const PipelineConfig& cfg);

}  // namespace deeprepair
