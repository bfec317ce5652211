#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "deeprepair/dataset.hpp"
#include "deeprepair/errors.hpp"
#include "deeprepair/harness.hpp"
#include "deeprepair/models.hpp"
#include "deeprepair/rng.hpp"
#include "deeprepair/trainer.hpp"

using namespace deeprepair;

namespace {

// easily separable two-class data: class = brightest channel
LabelledDataset separable_data(std::size_t n, std::uint64_t seed) {
  LabelledDataset ds;
  ds.shape = {3, 8, 8};
  ds.num_classes = 10;
  ds.name = "separable";
  Rng rng(seed);
  ds.images.resize(n * ds.shape.size());
  ds.labels.resize(n);
  const std::size_t pix = 64;
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = int(rng.uniform_int(0, 1));
    ds.labels[i] = cls;
    float* img = ds.images.data() + i * ds.shape.size();
    for (std::size_t p = 0; p < ds.shape.size(); ++p)
      img[p] = float(rng.uniform(0.0, 0.3));
    for (std::size_t p = 0; p < pix; ++p)
      img[std::size_t(cls) * pix + p] += 0.6f;
  }
  return ds;
}

TrainConfig quick_config(std::uint64_t seed) {
  TrainConfig tc;
  tc.batch_size = 32;
  tc.lr = 0.05;
  tc.max_epochs = 6;
  tc.patience = 6;
  tc.val_fraction = 0.2;
  tc.seed = seed;
  return tc;
}

}  // namespace

TEST_CASE("split_train_val partitions deterministically") {
  std::vector<std::size_t> tr1, va1, tr2, va2, tr3, va3;
  split_train_val(100, 0.2, 7, tr1, va1);
  split_train_val(100, 0.2, 7, tr2, va2);
  split_train_val(100, 0.2, 8, tr3, va3);
  CHECK(tr1 == tr2);
  CHECK(va1 == va2);
  CHECK(va1 != va3);
  CHECK(va1.size() == 20);
  CHECK(tr1.size() == 80);
  CHECK(std::is_sorted(tr1.begin(), tr1.end()));
  CHECK(std::is_sorted(va1.begin(), va1.end()));
  std::set<std::size_t> all(tr1.begin(), tr1.end());
  all.insert(va1.begin(), va1.end());
  CHECK(all.size() == 100);

  // tiny sets still get at least one validation sample
  split_train_val(5, 0.01, 1, tr1, va1);
  CHECK(va1.size() == 1);
  split_train_val(10, 0.0, 1, tr1, va1);
  CHECK(va1.empty());
  CHECK(tr1.size() == 10);
}

TEST_CASE("train_base learns a separable problem") {
  const LabelledDataset train = separable_data(256, 1);
  const LabelledDataset val = separable_data(64, 2);
  Rng rng(3);
  nn::Network<float> net = build_model<float>(arch_from_name("tiny"), rng);
  const double before = evaluate(net, val).accuracy;
  const TrainingLog log = train_base(net, train, val, quick_config(4));
  const double after = evaluate(net, val).accuracy;
  CHECK(after > before + 0.2);
  CHECK(after > 0.9);
  REQUIRE(!log.epochs.empty());
  CHECK(log.best_epoch >= 0);
  CHECK(log.best_val_accuracy == doctest::Approx(after).epsilon(1e-6));
  for (const EpochLog& e : log.epochs) {
    CHECK(e.js_loss == 0.0);
    CHECK(e.total_loss == doctest::Approx(e.ce_loss));
  }
}

TEST_CASE("train_base is seed deterministic") {
  const LabelledDataset train = separable_data(128, 5);
  const LabelledDataset val = separable_data(32, 6);
  auto run = [&](std::uint64_t seed) {
    Rng rng(7);
    nn::Network<float> net = build_model<float>(arch_from_name("tiny"), rng);
    TrainConfig tc = quick_config(seed);
    tc.max_epochs = 2;
    train_base(net, train, val, tc);
    return net.get_params();
  };
  CHECK(run(1) == run(1));
  CHECK(run(1) != run(2));
}

TEST_CASE("repair optimizes ce plus weighted js and logs both") {
  const LabelledDataset data = separable_data(192, 8);
  Rng rng(9);
  nn::Network<float> net = build_model<float>(arch_from_name("tiny"), rng);
  const LabelledDataset val = separable_data(48, 10);
  TrainConfig tc = quick_config(11);
  train_base(net, data, val, tc);

  const OperationSet ops = make_base_operations();
  tc.max_epochs = 3;
  tc.lambda = 6.0;
  const TrainingLog log = repair(net, data, ops, tc);
  REQUIRE(!log.epochs.empty());
  for (const EpochLog& e : log.epochs) {
    CHECK(e.js_loss >= 0.0);
    CHECK(e.total_loss ==
          doctest::Approx(e.ce_loss + tc.lambda * e.js_loss).epsilon(1e-6));
  }
  CHECK(evaluate(net, val).accuracy > 0.8);  // did not destroy the model
}

TEST_CASE("repair is seed deterministic") {
  const LabelledDataset data = separable_data(96, 12);
  const OperationSet ops = make_base_operations();
  auto run = [&](std::uint64_t seed) {
    Rng rng(13);
    nn::Network<float> net = build_model<float>(arch_from_name("tiny"), rng);
    TrainConfig tc = quick_config(seed);
    tc.max_epochs = 2;
    repair(net, data, ops, tc);
    return net.get_params();
  };
  CHECK(run(3) == run(3));
  CHECK(run(3) != run(4));
}

TEST_CASE("the network is restored to its best-validation weights") {
  const LabelledDataset train = separable_data(128, 14);
  const LabelledDataset val = separable_data(64, 15);
  Rng rng(16);
  nn::Network<float> net = build_model<float>(arch_from_name("tiny"), rng);
  TrainConfig tc = quick_config(17);
  tc.max_epochs = 8;
  const TrainingLog log = train_base(net, train, val, tc);
  CHECK(evaluate(net, val).accuracy ==
        doctest::Approx(log.best_val_accuracy).epsilon(1e-9));
}

TEST_CASE("early stopping respects the patience budget") {
  // unlearnable labels: validation accuracy cannot improve for long
  LabelledDataset train = separable_data(96, 18);
  Rng noise(19);
  for (auto& l : train.labels) l = int(noise.uniform_int(0, 9));
  const LabelledDataset val = separable_data(32, 20);
  Rng rng(21);
  nn::Network<float> net = build_model<float>(arch_from_name("tiny"), rng);
  TrainConfig tc = quick_config(22);
  tc.max_epochs = 200;
  tc.patience = 2;
  const TrainingLog log = train_base(net, train, val, tc);
  CHECK(log.early_stopped);
  CHECK(int(log.epochs.size()) < tc.max_epochs);
}

TEST_CASE("method names round trip") {
  const RepairMethod methods[] = {RepairMethod::kStyleRepair,
                                  RepairMethod::kPlain, RepairMethod::kBaseMix,
                                  RepairMethod::kCutout, RepairMethod::kMixup,
                                  RepairMethod::kCutmix};
  std::set<std::string> names;
  for (RepairMethod m : methods) {
    const std::string n = method_name(m);
    CHECK(method_from_name(n) == m);
    names.insert(n);
  }
  CHECK(names.size() == 6);
  CHECK(names.count("style-repair") == 1);
  CHECK_THROWS_AS(method_from_name("distill"), ConfigError);
}

TEST_CASE("baseline fine-tuning methods run and keep accuracy") {
  const LabelledDataset data = separable_data(160, 23);
  const LabelledDataset val = separable_data(48, 24);
  Rng rng(25);
  nn::Network<float> base = build_model<float>(arch_from_name("tiny"), rng);
  TrainConfig tc = quick_config(26);
  train_base(base, data, val, tc);
  const std::vector<float> base_params = base.get_params();

  for (RepairMethod m : {RepairMethod::kPlain, RepairMethod::kBaseMix,
                         RepairMethod::kCutout, RepairMethod::kMixup,
                         RepairMethod::kCutmix}) {
    nn::Network<float> net = build_model<float>(arch_from_name("tiny"), rng);
    net.set_params(base_params);
    TrainConfig ft = quick_config(27);
    ft.max_epochs = 2;
    ft.lr = 0.01;
    const TrainingLog log = finetune_baseline(net, data, m, ft);
    REQUIRE(!log.epochs.empty());
    CHECK(evaluate(net, val).accuracy > 0.7);
    if (m == RepairMethod::kPlain || m == RepairMethod::kCutout ||
        m == RepairMethod::kMixup || m == RepairMethod::kCutmix) {
      for (const EpochLog& e : log.epochs) CHECK(e.js_loss == 0.0);
    }
  }
}
