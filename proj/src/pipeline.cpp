#include "deeprepair/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "json.hpp"

#include "deeprepair/augment.hpp"
#include "deeprepair/cluster.hpp"
#include "deeprepair/corruption.hpp"
#include "deeprepair/errors.hpp"
#include "deeprepair/harness.hpp"
#include "deeprepair/models.hpp"
#include "deeprepair/report.hpp"
#include "deeprepair/style_transfer.hpp"
#include "deeprepair/trainer.hpp"

namespace deeprepair {

namespace fs = std::filesystem;

namespace {

bool dataset_present(const fs::path& dir) {
  return fs::exists(dir / "data_batch_1.bin") || fs::exists(dir / "train");
}

nlohmann::json log_to_json(const TrainingLog& log) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : log.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"total_loss", e.total_loss},
                      {"ce_loss", e.ce_loss},
                      {"js_loss", e.js_loss},
                      {"val_accuracy", e.val_accuracy}});
  return {{"epochs", epochs},
          {"best_epoch", log.best_epoch},
          {"best_val_accuracy", log.best_val_accuracy},
          {"early_stopped", log.early_stopped}};
}

void write_log(const fs::path& path, const TrainingLog& log) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write training log: " + path.string());
  out << log_to_json(log).dump(2) << "\n";
}

}  // namespace

Pipeline::Pipeline(PipelineConfig cfg, bool force, std::ostream* log)
    : cfg_(std::move(cfg)), force_(force), log_(log) {
  validate_config(cfg_);
}

fs::path Pipeline::config_path() const { return cfg_.out_dir / "config.json"; }
fs::path Pipeline::base_checkpoint_path() const {
  return cfg_.out_dir / "base.ckpt";
}
fs::path Pipeline::base_log_path() const {
  return cfg_.out_dir / "base_log.json";
}
fs::path Pipeline::failures_path() const {
  return cfg_.out_dir / "failures.json";
}
fs::path Pipeline::sampler_path() const {
  return cfg_.out_dir / "sampler.json";
}
fs::path Pipeline::repaired_checkpoint_path(const std::string& method) const {
  return cfg_.out_dir / ("repaired-" + method + ".ckpt");
}
fs::path Pipeline::repair_log_path(const std::string& method) const {
  return cfg_.out_dir / (method + "_log.json");
}
fs::path Pipeline::results_path() const {
  return cfg_.out_dir / "results.csv";
}
fs::path Pipeline::report_dir() const { return cfg_.out_dir / "report"; }

void Pipeline::say(const std::string& msg) const {
  if (log_) *log_ << msg << "\n";
}

void Pipeline::ensure_out_dir() {
  fs::create_directories(cfg_.out_dir);
  if (fs::exists(config_path()) && !force_) {
    const PipelineConfig existing = load_config(config_path());
    if (canonical_config(existing) != canonical_config(cfg_))
      throw ConfigError(
          "output directory " + cfg_.out_dir.string() +
          " was produced with a different config; use --force to overwrite "
          "or choose a fresh --out");
  }
  save_config(config_path(), cfg_);
}

void Pipeline::require(const fs::path& artifact,
                       const std::string& producing_stage) const {
  if (!fs::exists(artifact))
    throw LoadError("missing artifact " + artifact.string() + "; run the '" +
                    producing_stage + "' stage first");
}

void Pipeline::prepare_data() {
  ensure_out_dir();
  if (dataset_present(cfg_.data_dir)) {
    say("dataset already present in " + cfg_.data_dir.string());
    return;
  }
  SyntheticSpec spec;
  spec.train_count = cfg_.synth_train;
  spec.test_count = cfg_.synth_test;
  write_synthetic_dataset(cfg_.data_dir, spec, cfg_.seed);
  say("wrote synthetic dataset to " + cfg_.data_dir.string());
}

void Pipeline::train_base() {
  ensure_out_dir();
  if (!dataset_present(cfg_.data_dir))
    throw LoadError("no dataset in " + cfg_.data_dir.string() +
                    "; run the 'prepare-data' stage first");
  const LabelledDataset train = load_dataset(cfg_.data_dir, Split::kTrain);
  const LabelledDataset test = load_dataset(cfg_.data_dir, Split::kTest);
  ArchitectureSpec arch = arch_from_name(cfg_.arch);
  arch.num_classes = train.num_classes;
  arch.in_channels = train.shape.channels;
  Rng init = Rng(cfg_.seed).stream(0x0017u);
  nn::Network<float> net = build_model<float>(arch, init);
  TrainConfig tc = cfg_.base_train;
  tc.seed = cfg_.seed;
  const TrainingLog log = ::deeprepair::train_base(net, train, test, tc);
  const std::string hash = config_hash_hex(canonical_config(cfg_));
  save_checkpoint(base_checkpoint_path(), arch, net,
                  {{"model_id", cfg_.arch + "-base"},
                   {"config_hash", hash},
                   {"best_val_accuracy",
                    std::to_string(log.best_val_accuracy)}});
  write_log(base_log_path(), log);
  say("base model: best clean accuracy " +
      std::to_string(log.best_val_accuracy));
}

void Pipeline::collect_failures() {
  ensure_out_dir();
  require(base_checkpoint_path(), "train-base");
  const Checkpoint ckpt = load_checkpoint(base_checkpoint_path());
  const LabelledDataset test = load_dataset(cfg_.data_dir, Split::kTest);
  const CorruptionKind kind = kind_from_code(cfg_.corruption);
  const LabelledDataset corrupted = build_corrupted_testset(
      test, kind, cfg_.seed,
      cfg_.ingest_dir.empty()
          ? std::nullopt
          : std::optional<fs::path>(cfg_.ingest_dir));
  const FailureSplit split = ::deeprepair::collect_failures(
      ckpt.net, corrupted, kind, cfg_.guidance_count, cfg_.seed,
      ckpt.meta.at("model_id"));
  save_failure_split(failures_path(), split);
  say("failures on " + cfg_.corruption + ": " +
      std::to_string(split.failure_count) + " (guidance " +
      std::to_string(split.guidance_indices.size()) + ", held out " +
      std::to_string(split.heldout_indices.size()) + ")");
}

void Pipeline::fit_sampler() {
  ensure_out_dir();
  require(failures_path(), "collect-failures");
  const FailureSplit split = load_failure_split(failures_path());
  const LabelledDataset test = load_dataset(cfg_.data_dir, Split::kTest);
  const LabelledDataset corrupted = build_corrupted_testset(
      test, split.kind, cfg_.seed,
      cfg_.ingest_dir.empty()
          ? std::nullopt
          : std::optional<fs::path>(cfg_.ingest_dir));
  const LabelledDataset guidance =
      corrupted.subset(split.guidance_indices, "guidance");
  SamplerArtifact artifact;
  artifact.split_file = failures_path().string();
  if (strategy_from_name(cfg_.strategy) == SamplingStrategy::kUniform) {
    artifact.dist = uniform_distribution(guidance.size());
  } else {
    const int k =
        std::min<int>(cfg_.n_clusters, int(guidance.size()));
    const ClusterModel model = fit_clusters(guidance, k, cfg_.seed);
    artifact.dist = sampling_distribution(model, guidance);
  }
  save_sampler(sampler_path(), artifact);
  say("sampler (" + cfg_.strategy + ") over " +
      std::to_string(guidance.size()) + " guidance failures");
}

void Pipeline::repair() {
  ensure_out_dir();
  require(base_checkpoint_path(), "train-base");
  require(failures_path(), "collect-failures");
  const FailureSplit split = load_failure_split(failures_path());
  const LabelledDataset train = load_dataset(cfg_.data_dir, Split::kTrain);
  const LabelledDataset test = load_dataset(cfg_.data_dir, Split::kTest);
  const LabelledDataset corrupted = build_corrupted_testset(
      test, split.kind, cfg_.seed,
      cfg_.ingest_dir.empty()
          ? std::nullopt
          : std::optional<fs::path>(cfg_.ingest_dir));
  const std::string hash = config_hash_hex(canonical_config(cfg_));
  for (const std::string& mname : cfg_.methods) {
    const RepairMethod method = method_from_name(mname);
    Checkpoint ckpt = load_checkpoint(base_checkpoint_path());
    TrainConfig tc = cfg_.repair_train;
    tc.seed = hash_combine(cfg_.seed, fnv1a(mname));
    TrainingLog log;
    if (method == RepairMethod::kStyleRepair) {
      require(sampler_path(), "fit-sampler");
      const SamplerArtifact sampler = load_sampler(sampler_path());
      auto guidance = std::make_shared<const LabelledDataset>(
          corrupted.subset(split.guidance_indices, "guidance"));
      std::shared_ptr<const StyleBackend> backend =
          make_backend(cfg_.style_backend, cfg_.style_asset);
      OperationSet ops = make_base_operations();
      add_style_ops(ops, sampler.dist, guidance, backend, cfg_.n_style_ops,
                    cfg_.fixed_references);
      log = ::deeprepair::repair(ckpt.net, train, ops, tc);
    } else if (method == RepairMethod::kBaseMix) {
      log = finetune_baseline(ckpt.net, train, method, tc);
    } else {
      // plain/cutout/mixup/cutmix see the guidance failures directly
      LabelledDataset fused = train;
      fused.name = train.name + "+guidance";
      for (std::size_t idx : split.guidance_indices)
        fused.append(corrupted.image(idx), corrupted.labels[idx]);
      log = finetune_baseline(ckpt.net, fused, method, tc);
    }
    save_checkpoint(repaired_checkpoint_path(mname), ckpt.arch, ckpt.net,
                    {{"model_id", cfg_.arch + "-" + mname},
                     {"config_hash", hash},
                     {"method", mname}});
    write_log(repair_log_path(mname), log);
    say(mname + ": best val accuracy " +
        std::to_string(log.best_val_accuracy) + " at epoch " +
        std::to_string(log.best_epoch));
  }
}

void Pipeline::evaluate() {
  ensure_out_dir();
  require(base_checkpoint_path(), "train-base");
  require(failures_path(), "collect-failures");
  const FailureSplit split = load_failure_split(failures_path());
  const LabelledDataset test = load_dataset(cfg_.data_dir, Split::kTest);
  const LabelledDataset corrupted = build_corrupted_testset(
      test, split.kind, cfg_.seed,
      cfg_.ingest_dir.empty()
          ? std::nullopt
          : std::optional<fs::path>(cfg_.ingest_dir));
  const std::string hash = config_hash_hex(canonical_config(cfg_));
  std::vector<ResultRow> rows;
  auto add_rows = [&](const std::string& method, const std::string& repaired,
                      const nn::Network<float>& net) {
    ResultRow r;
    r.model = cfg_.arch;
    r.method = method;
    r.repaired_on = repaired;
    r.seed = cfg_.seed;
    r.config_hash = hash;
    r.eval_on = "clean";
    r.split = "clean";
    r.accuracy = ::deeprepair::evaluate(net, test).accuracy;
    rows.push_back(r);
    r.eval_on = cfg_.corruption;
    r.split = "corrupted";
    r.accuracy = ::deeprepair::evaluate(net, corrupted).accuracy;
    rows.push_back(r);
    r.split = "guidance";
    r.accuracy = accuracy_on_indices(net, corrupted, split.guidance_indices);
    rows.push_back(r);
    if (!split.heldout_indices.empty()) {
      r.split = "heldout";
      r.accuracy = accuracy_on_indices(net, corrupted, split.heldout_indices);
      rows.push_back(r);
    }
  };
  {
    const Checkpoint base = load_checkpoint(base_checkpoint_path());
    add_rows("base", "-", base.net);
  }
  for (const std::string& mname : cfg_.methods) {
    require(repaired_checkpoint_path(mname), "repair");
    const Checkpoint ckpt = load_checkpoint(repaired_checkpoint_path(mname));
    add_rows(mname, cfg_.corruption, ckpt.net);
  }
  write_results_csv(results_path(), rows);
  say("wrote " + std::to_string(rows.size()) + " result rows to " +
      results_path().string());
}

void Pipeline::report() {
  ensure_out_dir();
  require(results_path(), "evaluate");
  const std::vector<ResultRow> rows = read_results_csv(results_path());
  const LabelledDataset test = load_dataset(cfg_.data_dir, Split::kTest);
  const CorruptionKind kind = kind_from_code(cfg_.corruption);
  const LabelledDataset corrupted = build_corrupted_testset(
      test, kind, cfg_.seed,
      cfg_.ingest_dir.empty()
          ? std::nullopt
          : std::optional<fs::path>(cfg_.ingest_dir));

  // per-severity slices (the corrupted set is severity-major)
  std::vector<LabelledDataset> slices;
  const std::size_t block = test.size();
  for (int s = 1; s <= kNumSeverities; ++s) {
    std::vector<std::size_t> idx(block);
    for (std::size_t i = 0; i < block; ++i)
      idx[i] = std::size_t(s - 1) * block + i;
    slices.push_back(
        corrupted.subset(idx, cfg_.corruption + "-S" + std::to_string(s)));
  }

  std::vector<Checkpoint> ckpts;
  ckpts.push_back(load_checkpoint(base_checkpoint_path()));
  for (const std::string& mname : cfg_.methods) {
    require(repaired_checkpoint_path(mname), "repair");
    ckpts.push_back(load_checkpoint(repaired_checkpoint_path(mname)));
  }
  std::vector<NamedModel> models;
  models.push_back({"base", &ckpts[0].net});
  for (std::size_t i = 0; i < cfg_.methods.size(); ++i)
    models.push_back({cfg_.methods[i], &ckpts[i + 1].net});
  std::vector<NamedDataset> testsets;
  testsets.push_back({"clean", &test});
  for (const auto& s : slices) testsets.push_back({s.name, &s});
  const CrossRobustness cross = cross_robustness(models, testsets);
  emit_report(report_dir(), rows, &cross);
  say("report written to " + report_dir().string());
}

void Pipeline::run_all() {
  prepare_data();
  train_base();
  collect_failures();
  fit_sampler();
  repair();
  evaluate();
  report();
}

}  // namespace deeprepair
