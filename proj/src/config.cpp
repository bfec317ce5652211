#include "deeprepair/config.hpp"

#include <fstream>

#include "json.hpp"

#include "deeprepair/corruption.hpp"
#include "deeprepair/errors.hpp"
#include "deeprepair/models.hpp"

namespace deeprepair {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok)
      throw ConfigError("unknown config key '" + key + "' in " + context);
  }
}

json train_to_json(const TrainConfig& t) {
  return {{"batch_size", t.batch_size},
          {"lr", t.lr},
          {"momentum", t.momentum},
          {"weight_decay", t.weight_decay},
          {"max_epochs", t.max_epochs},
          {"patience", t.patience},
          {"lambda", t.lambda},
          {"alpha", t.alpha},
          {"m_width", t.m_width},
          {"val_fraction", t.val_fraction},
          {"baseline_alpha", t.baseline_alpha},
          {"cutout_size", t.cutout_size}};
}

void train_from_json(const json& j, TrainConfig& t,
                     const std::string& context) {
  check_keys(j,
             {"batch_size", "lr", "momentum", "weight_decay", "max_epochs",
              "patience", "lambda", "alpha", "m_width", "val_fraction",
              "baseline_alpha", "cutout_size"},
             context);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.lr = j.value("lr", t.lr);
  t.momentum = j.value("momentum", t.momentum);
  t.weight_decay = j.value("weight_decay", t.weight_decay);
  t.max_epochs = j.value("max_epochs", t.max_epochs);
  t.patience = j.value("patience", t.patience);
  t.lambda = j.value("lambda", t.lambda);
  t.alpha = j.value("alpha", t.alpha);
  t.m_width = j.value("m_width", t.m_width);
  t.val_fraction = j.value("val_fraction", t.val_fraction);
  t.baseline_alpha = j.value("baseline_alpha", t.baseline_alpha);
  t.cutout_size = j.value("cutout_size", t.cutout_size);
}

json config_to_json(const PipelineConfig& c) {
  return {{"data",
           {{"dir", c.data_dir.string()},
            {"synth_train", c.synth_train},
            {"synth_test", c.synth_test}}},
          {"model", {{"arch", c.arch}}},
          {"corruption",
           {{"kind", c.corruption}, {"ingest_dir", c.ingest_dir.string()}}},
          {"failures", {{"guidance_count", c.guidance_count}}},
          {"sampler",
           {{"n_clusters", c.n_clusters}, {"strategy", c.strategy}}},
          {"style",
           {{"backend", c.style_backend},
            {"asset", c.style_asset.string()},
            {"fixed_references", c.fixed_references},
            {"n_ops", c.n_style_ops}}},
          {"train",
           {{"base", train_to_json(c.base_train)},
            {"repair", train_to_json(c.repair_train)}}},
          {"methods", c.methods},
          {"seed", c.seed},
          {"out_dir", c.out_dir.string()}};
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c = default_config();
  check_keys(j,
             {"data", "model", "corruption", "failures", "sampler", "style",
              "train", "methods", "seed", "out_dir"},
             "top level");
  if (j.contains("data")) {
    const json& d = j.at("data");
    check_keys(d, {"dir", "synth_train", "synth_test"}, "data");
    if (d.contains("dir")) c.data_dir = d.at("dir").get<std::string>();
    c.synth_train = d.value("synth_train", c.synth_train);
    c.synth_test = d.value("synth_test", c.synth_test);
  }
  if (j.contains("model")) {
    check_keys(j.at("model"), {"arch"}, "model");
    c.arch = j.at("model").value("arch", c.arch);
  }
  if (j.contains("corruption")) {
    const json& d = j.at("corruption");
    check_keys(d, {"kind", "ingest_dir"}, "corruption");
    c.corruption = d.value("kind", c.corruption);
    if (d.contains("ingest_dir"))
      c.ingest_dir = d.at("ingest_dir").get<std::string>();
  }
  if (j.contains("failures")) {
    check_keys(j.at("failures"), {"guidance_count"}, "failures");
    c.guidance_count = j.at("failures").value("guidance_count",
                                              c.guidance_count);
  }
  if (j.contains("sampler")) {
    const json& d = j.at("sampler");
    check_keys(d, {"n_clusters", "strategy"}, "sampler");
    c.n_clusters = d.value("n_clusters", c.n_clusters);
    c.strategy = d.value("strategy", c.strategy);
  }
  if (j.contains("style")) {
    const json& d = j.at("style");
    check_keys(d, {"backend", "asset", "fixed_references", "n_ops"}, "style");
    c.style_backend = d.value("backend", c.style_backend);
    if (d.contains("asset")) c.style_asset = d.at("asset").get<std::string>();
    c.fixed_references = d.value("fixed_references", c.fixed_references);
    c.n_style_ops = d.value("n_ops", c.n_style_ops);
  }
  if (j.contains("train")) {
    const json& d = j.at("train");
    check_keys(d, {"base", "repair"}, "train");
    if (d.contains("base"))
      train_from_json(d.at("base"), c.base_train, "train.base");
    if (d.contains("repair"))
      train_from_json(d.at("repair"), c.repair_train, "train.repair");
  }
  if (j.contains("methods"))
    c.methods = j.at("methods").get<std::vector<std::string>>();
  c.seed = j.value("seed", c.seed);
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  return c;
}

}  // namespace

PipelineConfig default_config() { return PipelineConfig{}; }

PipelineConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("bad config JSON: " + std::string(e.what()));
  }
  PipelineConfig cfg = config_from_json(j);
  validate_config(cfg);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

void save_config(const std::filesystem::path& path,
                 const PipelineConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config: " + path.string());
  out << config_to_json(cfg).dump(2) << "\n";
}

std::string canonical_config(const PipelineConfig& cfg) {
  // nlohmann objects keep keys sorted, so dump() is canonical.  Storage
  // locations are stripped: two runs of the same experiment hash equal
  // no matter where their artifacts live.
  json j = config_to_json(cfg);
  j.erase("out_dir");
  j["data"].erase("dir");
  return j.dump();
}

void validate_config(const PipelineConfig& cfg) {
  kind_from_code(cfg.corruption);       // throws on unknown code
  arch_from_name(cfg.arch);             // throws on unknown arch
  strategy_from_name(cfg.strategy);
  if (cfg.style_backend != "moment" && cfg.style_backend != "feature")
    throw ConfigError("style backend must be moment or feature");
  if (cfg.n_clusters < 1) throw ConfigError("n_clusters must be >= 1");
  if (cfg.n_style_ops < 0) throw ConfigError("n_ops must be >= 0");
  if (cfg.guidance_count == 0)
    throw ConfigError("guidance_count must be >= 1");
  if (cfg.synth_train < 1 || cfg.synth_test < 1)
    throw ConfigError("synthetic dataset sizes must be >= 1");
  if (cfg.methods.empty()) throw ConfigError("methods must be non-empty");
  for (const auto& m : cfg.methods) method_from_name(m);
  for (const TrainConfig* t : {&cfg.base_train, &cfg.repair_train}) {
    if (t->batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (t->lr <= 0.0) throw ConfigError("lr must be positive");
    if (t->max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (t->patience < 1) throw ConfigError("patience must be >= 1");
    if (t->lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (t->alpha <= 0.0) throw ConfigError("alpha must be positive");
    if (t->m_width < 1) throw ConfigError("m_width must be >= 1");
  }
}

}  // namespace deeprepair
