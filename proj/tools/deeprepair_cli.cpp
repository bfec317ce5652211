// deeprepair: repair an image classifier against a corruption pattern
// via style-guided augmentation and consistency fine-tuning.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "deeprepair/config.hpp"
#include "deeprepair/errors.hpp"
#include "deeprepair/pipeline.hpp"

namespace {

struct CliOptions {
  std::string config_file;
  std::string out_dir;
  std::string data_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool force = false;
};

deeprepair::PipelineConfig resolve_config(const CliOptions& opt) {
  deeprepair::PipelineConfig cfg =
      opt.config_file.empty() ? deeprepair::default_config()
                              : deeprepair::load_config(opt.config_file);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (!opt.data_dir.empty()) cfg.data_dir = opt.data_dir;
  if (opt.seed_set) cfg.seed = opt.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DNN repair pipeline: corruption benchmarking, failure "
               "collection, style-guided augmentation, consistency repair"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("-c,--config", opt.config_file, "JSON config file");
  app.add_option("-o,--out", opt.out_dir, "output directory override");
  app.add_option("-d,--data", opt.data_dir, "dataset directory override");
  auto* seed_opt = app.add_option("-s,--seed", opt.seed, "seed override");
  app.add_flag("-f,--force", opt.force,
               "overwrite artifacts produced with a different config");

  const char* stages[] = {"prepare-data", "train-base", "collect-failures",
                          "fit-sampler", "repair", "evaluate", "report",
                          "run-all"};
  const char* help[] = {
      "write the synthetic dataset unless one is already present",
      "train the base classifier on the clean training set",
      "find corruption failures and split guidance / held-out",
      "cluster the guidance failures and fit the reference sampler",
      "fine-tune with the configured repair methods",
      "score base and repaired models on every split",
      "emit results.csv, cross_matrix.csv and figures",
      "run every stage in order"};
  for (std::size_t i = 0; i < 8; ++i) app.add_subcommand(stages[i], help[i]);

  CLI11_PARSE(app, argc, argv);
  opt.seed_set = seed_opt->count() > 0;

  try {
    deeprepair::Pipeline pipeline(resolve_config(opt), opt.force, &std::cout);
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "prepare-data") pipeline.prepare_data();
    else if (name == "train-base") pipeline.train_base();
    else if (name == "collect-failures") pipeline.collect_failures();
    else if (name == "fit-sampler") pipeline.fit_sampler();
    else if (name == "repair") pipeline.repair();
    else if (name == "evaluate") pipeline.evaluate();
    else if (name == "report") pipeline.report();
    else pipeline.run_all();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
