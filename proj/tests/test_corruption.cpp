#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "deeprepair/corruption.hpp"
#include "deeprepair/dataset.hpp"
#include "deeprepair/errors.hpp"
#include "deeprepair/npy_io.hpp"
#include "deeprepair/rng.hpp"

using namespace deeprepair;
namespace fs = std::filesystem;

namespace {

Image random_image(int h, int w, std::uint64_t seed) {
  Image img({3, h, w});
  Rng rng(seed);
  for (auto& v : img.data) v = float(rng.uniform(0.1, 0.9));
  return img;
}

double mean_mse(CorruptionKind kind, int severity, int n_images) {
  double total = 0.0;
  for (int i = 0; i < n_images; ++i) {
    const Image img = random_image(32, 32, 1000 + std::uint64_t(i));
    Rng rng = Rng(5).stream(std::uint64_t(kind), std::uint64_t(severity),
                            std::uint64_t(i));
    CorruptionSpec spec{kind, severity, {}, CorruptionSource::kSynthesized};
    total += mse(img, apply_corruption(img, spec, rng));
  }
  return total / n_images;
}

}  // namespace

TEST_CASE("kind codes round trip") {
  const auto kinds = all_corruption_kinds();
  CHECK(kinds.size() == 15);
  for (CorruptionKind k : kinds)
    CHECK(kind_from_code(kind_code(k)) == k);
  CHECK_THROWS_AS(kind_from_code("XX"), ConfigError);
}

TEST_CASE("synthesized vs ingestion-only partition") {
  int synth = 0;
  for (CorruptionKind k : all_corruption_kinds())
    if (is_synthesized(k)) ++synth;
  CHECK(synth == 9);
  CHECK(is_synthesized(CorruptionKind::kGaussianNoise));
  CHECK(is_synthesized(CorruptionKind::kJpeg));
  CHECK_FALSE(is_synthesized(CorruptionKind::kGlassBlur));
  CHECK_FALSE(is_synthesized(CorruptionKind::kFog));
}

TEST_CASE("spec validation") {
  CorruptionSpec spec{CorruptionKind::kGaussianNoise, 3, {},
                      CorruptionSource::kSynthesized};
  CHECK_NOTHROW(spec.validate());
  spec.severity = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.severity = 6;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK_THROWS_AS(severity_params(CorruptionKind::kGaussianNoise, 0),
                  ConfigError);
  CHECK_THROWS_AS(severity_params(CorruptionKind::kSnow, 3),
                  UnsupportedKindError);
}

TEST_CASE("synthesizing an ingestion-only kind fails loudly") {
  const Image img = random_image(8, 8, 1);
  Rng rng(1);
  CorruptionSpec spec{CorruptionKind::kSnow, 2, {},
                      CorruptionSource::kSynthesized};
  CHECK_THROWS_AS(apply_corruption(img, spec, rng), UnsupportedKindError);
}

TEST_CASE("corruption is deterministic given the rng state") {
  const Image img = random_image(16, 16, 2);
  for (CorruptionKind k :
       {CorruptionKind::kGaussianNoise, CorruptionKind::kShotNoise,
        CorruptionKind::kImpulseNoise, CorruptionKind::kMotionBlur}) {
    CorruptionSpec spec{k, 4, {}, CorruptionSource::kSynthesized};
    Rng r1(77), r2(77);
    const Image a = apply_corruption(img, spec, r1);
    const Image b = apply_corruption(img, spec, r2);
    CHECK(a.data == b.data);
  }
}

TEST_CASE("noise severity is monotone in mean mse over 100 images") {
  for (CorruptionKind k :
       {CorruptionKind::kGaussianNoise, CorruptionKind::kShotNoise,
        CorruptionKind::kImpulseNoise}) {
    double prev = -1.0;
    for (int s = 1; s <= 5; ++s) {
      const double m = mean_mse(k, s, 100);
      CHECK(m > prev);
      prev = m;
    }
  }
}

TEST_CASE("brightness closed form on mid-gray") {
  Image img({3, 4, 4}, 0.5f);
  Rng rng(3);
  for (int s = 1; s <= 5; ++s) {
    CorruptionSpec spec{CorruptionKind::kBrightness, s, {},
                        CorruptionSource::kSynthesized};
    const Image out = apply_corruption(img, spec, rng);
    const double offset = severity_params(CorruptionKind::kBrightness, s)[0];
    for (float v : out.data)
      CHECK(v == doctest::Approx(0.5 + offset).epsilon(1e-6));
  }
}

TEST_CASE("contrast scales about the channel mean") {
  Image img({1, 1, 2});
  img.data = {0.2f, 0.8f};  // mean 0.5
  Rng rng(4);
  CorruptionSpec spec{CorruptionKind::kContrast, 2, {},
                      CorruptionSource::kSynthesized};  // factor 0.5
  const Image out = apply_corruption(img, spec, rng);
  CHECK(out.data[0] == doctest::Approx(0.35).epsilon(1e-6));
  CHECK(out.data[1] == doctest::Approx(0.65).epsilon(1e-6));
  // constant image is a fixed point
  Image flat({3, 4, 4}, 0.3f);
  const Image out2 = apply_corruption(flat, spec, rng);
  for (float v : out2.data) CHECK(v == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("pixelate produces constant blocks at scale 1/2") {
  const Image img = random_image(16, 16, 5);
  Rng rng(6);
  CorruptionSpec spec{CorruptionKind::kPixelate, 1, {0.5},
                      CorruptionSource::kSynthesized};
  const Image out = apply_corruption(img, spec, rng);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 16; y += 2)
      for (int x = 0; x < 16; x += 2) {
        CHECK(out.at(c, y, x) == out.at(c, y, x + 1));
        CHECK(out.at(c, y, x) == out.at(c, y + 1, x));
        CHECK(out.at(c, y, x) == out.at(c, y + 1, x + 1));
      }
}

TEST_CASE("jpeg kind routes through real encoding") {
  const Image img = random_image(32, 32, 7);
  Rng rng(8);
  CorruptionSpec s5{CorruptionKind::kJpeg, 5, {},
                    CorruptionSource::kSynthesized};
  CorruptionSpec s1{CorruptionKind::kJpeg, 1, {},
                    CorruptionSource::kSynthesized};
  const Image hard = apply_corruption(img, s5, rng);
  const Image soft = apply_corruption(img, s1, rng);
  CHECK(mse(img, hard) > mse(img, soft));
  CHECK(mse(img, soft) > 0.0);
}

TEST_CASE("pixel range closure for every synthesized kind at severity 5") {
  const Image img = random_image(32, 32, 9);
  for (CorruptionKind k : all_corruption_kinds()) {
    if (!is_synthesized(k)) continue;
    Rng rng(10);
    CorruptionSpec spec{k, 5, {}, CorruptionSource::kSynthesized};
    const Image out = apply_corruption(img, spec, rng);
    CHECK(out.shape == img.shape);
    for (float v : out.data) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }
}

TEST_CASE("blur kinds smooth the image") {
  // high-frequency checkerboard loses contrast under both blurs
  Image img({3, 16, 16});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x)
        img.at(c, y, x) = ((x + y) % 2) ? 0.9f : 0.1f;
  for (CorruptionKind k :
       {CorruptionKind::kDefocusBlur, CorruptionKind::kMotionBlur}) {
    Rng rng(11);
    CorruptionSpec spec{k, 5, {}, CorruptionSource::kSynthesized};
    const Image out = apply_corruption(img, spec, rng);
    const ChannelStats before = channel_stats(img.channel(0), 256);
    const ChannelStats after = channel_stats(out.channel(0), 256);
    CHECK(after.stddev < before.stddev);
  }
}

TEST_CASE("build_corrupted_testset stacks severities deterministically") {
  const fs::path dir = fs::temp_directory_path() / "dr_corr_ds";
  fs::remove_all(dir);
  SyntheticSpec spec;
  spec.train_count = 20;
  spec.test_count = 12;
  write_synthetic_dataset(dir, spec, 1);
  const LabelledDataset test = load_dataset(dir, Split::kTest);

  const LabelledDataset a =
      build_corrupted_testset(test, CorruptionKind::kGaussianNoise, 3);
  const LabelledDataset b =
      build_corrupted_testset(test, CorruptionKind::kGaussianNoise, 3);
  const LabelledDataset c =
      build_corrupted_testset(test, CorruptionKind::kGaussianNoise, 4);
  CHECK(a.size() == 5 * test.size());
  CHECK(a.images == b.images);
  CHECK(a.images != c.images);
  CHECK_NOTHROW(a.validate());
  // labels repeat per severity block
  for (int s = 0; s < 5; ++s)
    for (std::size_t i = 0; i < test.size(); ++i)
      CHECK(a.labels[std::size_t(s) * test.size() + i] == test.labels[i]);
}

TEST_CASE("ingestion reads severity-major npy and validates shape") {
  const fs::path dir = fs::temp_directory_path() / "dr_corr_ingest";
  fs::remove_all(dir);
  fs::create_directories(dir);
  SyntheticSpec sspec;
  sspec.train_count = 20;
  sspec.test_count = 6;
  write_synthetic_dataset(dir / "data", sspec, 2);
  const LabelledDataset test = load_dataset(dir / "data", Split::kTest);

  const std::size_t hw = 32 * 32 * 3;
  std::vector<std::uint8_t> raw(5 * test.size() * hw);
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i] = std::uint8_t(i % 251);
  write_npy_u8(dir / "GB.npy", raw, {5 * test.size(), 32, 32, 3});

  const LabelledDataset ingested = ingest_corrupted(
      dir / "GB.npy", CorruptionKind::kGlassBlur, {1, 2, 3, 4, 5}, test);
  CHECK(ingested.size() == 5 * test.size());
  CHECK_NOTHROW(ingested.validate());
  // u8 HWC -> float CHW conversion: (c=0, y=0, x=1) reads raw index 3
  CHECK(ingested.images[1] == doctest::Approx(double(raw[3]) / 255.0)
                                  .epsilon(1e-6));

  // wrong image count is rejected
  write_npy_u8(dir / "bad.npy", std::vector<std::uint8_t>(4 * hw),
               {4, 32, 32, 3});
  CHECK_THROWS_AS(ingest_corrupted(dir / "bad.npy",
                                   CorruptionKind::kGlassBlur, {1}, test),
                  ValidationError);

  const LabelledDataset via_builder = build_corrupted_testset(
      test, CorruptionKind::kGlassBlur, 3, dir);
  CHECK(via_builder.images == ingested.images);
}
