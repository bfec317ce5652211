#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <memory>
#include <set>

#include "deeprepair/errors.hpp"
#include "deeprepair/harness.hpp"
#include "deeprepair/models.hpp"
#include "deeprepair/rng.hpp"

using namespace deeprepair;
namespace fs = std::filesystem;

namespace {

LabelledDataset tiny_data(std::size_t n, std::uint64_t seed) {
  LabelledDataset ds;
  ds.shape = {3, 8, 8};
  ds.num_classes = 10;
  ds.name = "tiny";
  Rng rng(seed);
  ds.images.resize(n * ds.shape.size());
  for (auto& v : ds.images) v = float(rng.uniform());
  ds.labels.resize(n);
  for (auto& l : ds.labels) l = int(rng.uniform_int(0, 9));
  return ds;
}

// GAP -> Linear with hand-set weights: prediction is computable by hand
nn::Network<float> pooled_linear(const std::vector<float>& w,
                                 const std::vector<float>& b) {
  nn::Network<float> net;
  const int g = net.add(std::make_unique<nn::GlobalAvgPool<float>>(),
                        {nn::Network<float>::kInput});
  auto lin = std::make_unique<nn::Linear<float>>(3, 10);
  lin->params()[0].value = w;
  lin->params()[1].value = b;
  net.add(std::move(lin), {g});
  return net;
}

// model that always predicts class 0 regardless of the input
nn::Network<float> constant_class0() {
  std::vector<float> w(3 * 10, 0.0f);
  std::vector<float> b(10, 0.0f);
  b[0] = 10.0f;
  return pooled_linear(w, b);
}

}  // namespace

TEST_CASE("predict matches a hand computation") {
  // weight column j = j * mean of channel 0: argmax is always class 9
  std::vector<float> w(3 * 10, 0.0f);
  for (int j = 0; j < 10; ++j) w[std::size_t(j)] = float(j);
  nn::Network<float> net = pooled_linear(w, std::vector<float>(10, 0.0f));
  const LabelledDataset ds = tiny_data(7, 1);
  const std::vector<int> preds = predict(net, ds, 3);
  REQUIRE(preds.size() == 7);
  for (int p : preds) CHECK(p == 9);
}

TEST_CASE("predict is independent of the batch size") {
  Rng rng(2);
  nn::Network<float> net = build_model<float>(arch_from_name("tiny"), rng);
  const LabelledDataset ds = tiny_data(33, 3);
  CHECK(predict(net, ds, 1) == predict(net, ds, 8));
  CHECK(predict(net, ds, 8) == predict(net, ds, 128));
}

TEST_CASE("evaluate counts correct predictions and fills the mask") {
  nn::Network<float> net = constant_class0();
  LabelledDataset ds = tiny_data(10, 4);
  for (std::size_t i = 0; i < 10; ++i) ds.labels[i] = (i < 4) ? 0 : 1;
  const EvalResult r = evaluate(net, ds, 4);
  CHECK(r.total == 10);
  CHECK(r.correct == 4);
  CHECK(r.accuracy == doctest::Approx(0.4));
  REQUIRE(r.correct_mask.size() == 10);
  for (std::size_t i = 0; i < 10; ++i)
    CHECK(r.correct_mask[i] == (i < 4 ? 1 : 0));
}

TEST_CASE("accuracy_on_indices restricts the evaluation") {
  nn::Network<float> net = constant_class0();
  LabelledDataset ds = tiny_data(8, 5);
  for (std::size_t i = 0; i < 8; ++i) ds.labels[i] = int(i % 2);  // even: 0
  CHECK(accuracy_on_indices(net, ds, {0, 2, 4, 6}) == doctest::Approx(1.0));
  CHECK(accuracy_on_indices(net, ds, {1, 3, 5}) == doctest::Approx(0.0));
  CHECK(accuracy_on_indices(net, ds, {0, 1}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(accuracy_on_indices(net, ds, {}), ValidationError);
}

TEST_CASE("collect_failures partitions all failures") {
  nn::Network<float> net = constant_class0();
  LabelledDataset ds = tiny_data(50, 6);
  // 30 failures: labels 1; 20 successes: label 0
  for (std::size_t i = 0; i < 50; ++i) ds.labels[i] = (i < 30) ? 1 : 0;
  const FailureSplit split = collect_failures(
      net, ds, CorruptionKind::kGaussianNoise, 12, 99, "m1");
  CHECK(split.model_id == "m1");
  CHECK(split.kind == CorruptionKind::kGaussianNoise);
  CHECK(split.seed == 99);
  CHECK(split.failure_count == 30);
  CHECK(split.guidance_indices.size() == 12);
  CHECK(split.heldout_indices.size() == 18);
  CHECK(std::is_sorted(split.guidance_indices.begin(),
                       split.guidance_indices.end()));
  CHECK(std::is_sorted(split.heldout_indices.begin(),
                       split.heldout_indices.end()));
  std::set<std::size_t> all;
  for (std::size_t i : split.guidance_indices) {
    CHECK(i < 30);  // only actual failures
    all.insert(i);
  }
  for (std::size_t i : split.heldout_indices) {
    CHECK(i < 30);
    all.insert(i);
  }
  CHECK(all.size() == 30);  // disjoint and exhaustive
}

TEST_CASE("collect_failures is seed deterministic") {
  nn::Network<float> net = constant_class0();
  LabelledDataset ds = tiny_data(40, 7);
  for (auto& l : ds.labels) l = 1;
  const FailureSplit a = collect_failures(
      net, ds, CorruptionKind::kShotNoise, 10, 5, "m");
  const FailureSplit b = collect_failures(
      net, ds, CorruptionKind::kShotNoise, 10, 5, "m");
  const FailureSplit c = collect_failures(
      net, ds, CorruptionKind::kShotNoise, 10, 6, "m");
  CHECK(a.guidance_indices == b.guidance_indices);
  CHECK(a.heldout_indices == b.heldout_indices);
  CHECK(a.guidance_indices != c.guidance_indices);
}

TEST_CASE("guidance count clamps to the number of failures") {
  nn::Network<float> net = constant_class0();
  LabelledDataset ds = tiny_data(10, 8);
  for (auto& l : ds.labels) l = 2;  // everything fails
  const FailureSplit split = collect_failures(
      net, ds, CorruptionKind::kContrast, 500, 1, "m");
  CHECK(split.guidance_indices.size() == 10);
  CHECK(split.heldout_indices.empty());
}

TEST_CASE("a perfect model yields EmptyFailureError") {
  nn::Network<float> net = constant_class0();
  LabelledDataset ds = tiny_data(10, 9);
  for (auto& l : ds.labels) l = 0;
  CHECK_THROWS_AS(
      collect_failures(net, ds, CorruptionKind::kBrightness, 5, 1, "m"),
      EmptyFailureError);
}

TEST_CASE("failure split json round trip") {
  FailureSplit split;
  split.model_id = "base-tiny";
  split.kind = CorruptionKind::kJpeg;
  split.seed = 42;
  split.failure_count = 5;
  split.guidance_indices = {1, 3, 4};
  split.heldout_indices = {7, 9};
  const fs::path path = fs::temp_directory_path() / "dr_split.json";
  save_failure_split(path, split);
  const FailureSplit back = load_failure_split(path);
  CHECK(back.model_id == split.model_id);
  CHECK(back.kind == split.kind);
  CHECK(back.seed == split.seed);
  CHECK(back.failure_count == split.failure_count);
  CHECK(back.guidance_indices == split.guidance_indices);
  CHECK(back.heldout_indices == split.heldout_indices);
  CHECK_THROWS_AS(load_failure_split(fs::temp_directory_path() /
                                     "dr_split_missing.json"),
                  LoadError);
}

TEST_CASE("batch_tensor copies the selected images") {
  const LabelledDataset ds = tiny_data(6, 10);
  const nn::Tensor<float> batch = batch_tensor(ds, {5, 0});
  REQUIRE(batch.shape == std::vector<std::size_t>{2, 3, 8, 8});
  const std::size_t sz = ds.shape.size();
  for (std::size_t p = 0; p < sz; ++p) {
    CHECK(batch.data[p] == ds.images[5 * sz + p]);
    CHECK(batch.data[sz + p] == ds.images[p]);
  }
}
