#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>

#include "deeprepair/dataset.hpp"
#include "deeprepair/errors.hpp"
#include "deeprepair/png_io.hpp"
#include "deeprepair/rng.hpp"

using namespace deeprepair;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dr_ds_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("synthetic dataset round trips through the cifar loader") {
  const fs::path dir = fresh_dir("synth");
  SyntheticSpec spec;
  spec.train_count = 200;
  spec.test_count = 60;
  write_synthetic_dataset(dir, spec, 123);

  const LabelledDataset train = load_dataset(dir, Split::kTrain);
  const LabelledDataset test = load_dataset(dir, Split::kTest);
  CHECK(train.size() == 200);
  CHECK(test.size() == 60);
  CHECK(train.num_classes == 10);
  CHECK(train.shape == ImageShape{3, 32, 32});
  CHECK_NOTHROW(train.validate());
  CHECK_NOTHROW(test.validate());

  // balanced classes
  std::vector<int> counts(10, 0);
  for (int label : train.labels) counts[label]++;
  for (int c : counts) CHECK(c == 20);

  for (float v : train.images) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("synthetic dataset is seed deterministic") {
  const fs::path a = fresh_dir("seed_a");
  const fs::path b = fresh_dir("seed_b");
  const fs::path c = fresh_dir("seed_c");
  SyntheticSpec spec;
  spec.train_count = 50;
  spec.test_count = 20;
  write_synthetic_dataset(a, spec, 9);
  write_synthetic_dataset(b, spec, 9);
  write_synthetic_dataset(c, spec, 10);
  const LabelledDataset da = load_dataset(a, Split::kTrain);
  const LabelledDataset db = load_dataset(b, Split::kTrain);
  const LabelledDataset dc = load_dataset(c, Split::kTrain);
  CHECK(da.images == db.images);
  CHECK(da.labels == db.labels);
  CHECK(da.images != dc.images);
}

TEST_CASE("classes are visually distinct") {
  const fs::path dir = fresh_dir("distinct");
  SyntheticSpec spec;
  spec.train_count = 100;
  spec.test_count = 20;
  write_synthetic_dataset(dir, spec, 3);
  const LabelledDataset train = load_dataset(dir, Split::kTrain);
  // mean distance between same-class images must undercut cross-class
  auto dist = [&](std::size_t i, std::size_t j) {
    double d = 0.0;
    for (std::size_t p = 0; p < train.image_size(); ++p) {
      const double delta = train.image_data(i)[p] - train.image_data(j)[p];
      d += delta * delta;
    }
    return d;
  };
  double same = 0.0, cross = 0.0;
  int same_n = 0, cross_n = 0;
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = i + 1; j < 40; ++j) {
      if (train.labels[i] == train.labels[j]) {
        same += dist(i, j);
        ++same_n;
      } else {
        cross += dist(i, j);
        ++cross_n;
      }
    }
  CHECK(same_n > 0);
  CHECK(cross_n > 0);
  CHECK(same / same_n < cross / cross_n);
}

TEST_CASE("subset and append maintain invariants") {
  const fs::path dir = fresh_dir("subset");
  SyntheticSpec spec;
  spec.train_count = 30;
  spec.test_count = 10;
  write_synthetic_dataset(dir, spec, 4);
  LabelledDataset train = load_dataset(dir, Split::kTrain);

  const LabelledDataset sub = train.subset({5, 2, 9}, "sub");
  CHECK(sub.size() == 3);
  CHECK(sub.name == "sub");
  CHECK(sub.labels[0] == train.labels[5]);
  CHECK(sub.labels[1] == train.labels[2]);
  CHECK(sub.image_data(2)[0] == train.image_data(9)[0]);
  CHECK_NOTHROW(sub.validate());

  const std::size_t before = train.size();
  train.append(train.image(0), train.labels[0]);
  CHECK(train.size() == before + 1);
  CHECK(train.labels.back() == train.labels[0]);
  CHECK_NOTHROW(train.validate());
}

TEST_CASE("validate catches breached invariants") {
  LabelledDataset ds;
  ds.shape = {3, 2, 2};
  ds.num_classes = 2;
  ds.name = "broken";
  ds.images.assign(12, 0.5f);
  ds.labels = {0};
  CHECK_NOTHROW(ds.validate());
  ds.labels = {5};  // out of range
  CHECK_THROWS_AS(ds.validate(), ValidationError);
  ds.labels = {0};
  ds.images[3] = 2.0f;  // out of pixel range
  CHECK_THROWS_AS(ds.validate(), ValidationError);
  ds.images.resize(11);  // size mismatch
  CHECK_THROWS_AS(ds.validate(), ValidationError);
}

TEST_CASE("png directory loader") {
  const fs::path dir = fresh_dir("pngdir");
  fs::create_directories(dir / "train");
  Rng rng(17);
  std::ofstream index(dir / "train" / "labels.txt");
  for (int i = 0; i < 4; ++i) {
    Image img({3, 8, 8});
    for (auto& v : img.data) v = float(int(rng.uniform() * 255) / 255.0);
    const std::string name = "img" + std::to_string(i) + ".png";
    write_png(dir / "train" / name, img);
    index << name << " " << (i % 2) << "\n";
  }
  index.close();
  const LabelledDataset ds = load_dataset(dir, Split::kTrain);
  CHECK(ds.size() == 4);
  CHECK(ds.shape == ImageShape{3, 8, 8});
  CHECK(ds.labels == std::vector<int>{0, 1, 0, 1});
  CHECK_NOTHROW(ds.validate());
}

TEST_CASE("loader reports missing data clearly") {
  const fs::path dir = fresh_dir("empty");
  CHECK_THROWS_AS(load_dataset(dir, Split::kTrain), LoadError);
}
