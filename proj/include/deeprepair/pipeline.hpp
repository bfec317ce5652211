// Stage orchestration.  Every stage reads its inputs from the output
// directory of earlier stages and fails with an actionable message when
// a prerequisite artifact is missing.  The effective config is written
// next to the artifacts and must not drift between stages.

#pragma once

#include <filesystem>
#include <iosfwd>

#include "deeprepair/config.hpp"

namespace deeprepair {

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg, bool force = false,
                    std::ostream* log = nullptr);

  void prepare_data();
  void train_base();
  void collect_failures();
  void fit_sampler();
  void repair();
  void evaluate();
  void report();
  void run_all();

  // artifact locations
  std::filesystem::path config_path() const;
  std::filesystem::path base_checkpoint_path() const;
  std::filesystem::path base_log_path() const;
  std::filesystem::path failures_path() const;
  std::filesystem::path sampler_path() const;
  std::filesystem::path repaired_checkpoint_path(
      const std::string& method) const;
  std::filesystem::path repair_log_path(const std::string& method) const;
  std::filesystem::path results_path() const;
  std::filesystem::path report_dir() const;

  const PipelineConfig& config() const { return cfg_; }

 private:
  void ensure_out_dir();
  void require(const std::filesystem::path& artifact,
               const std::string& producing_stage) const;
  void say(const std::string& msg) const;

  PipelineConfig cfg_;
  bool force_;
  std::ostream* log_;
};

}  // namespace deeprepair
