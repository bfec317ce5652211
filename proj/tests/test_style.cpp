#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "deeprepair/errors.hpp"
#include "deeprepair/image.hpp"
#include "deeprepair/rng.hpp"
#include "deeprepair/style_transfer.hpp"

using namespace deeprepair;
namespace fs = std::filesystem;

namespace {

Image uniform_image(int c, int h, int w, double lo, double hi,
                    std::uint64_t seed) {
  Image img({c, h, w});
  Rng rng(seed);
  for (auto& v : img.data) v = float(rng.uniform(lo, hi));
  return img;
}

}  // namespace

TEST_CASE("moment backend matches style statistics on 100 pairs") {
  const auto backend = make_moment_backend();
  CHECK(backend->name() == "moment");
  CHECK(backend->deterministic());
  for (int trial = 0; trial < 100; ++trial) {
    // ranges chosen so the affine map stays inside [0,1]: no clamping
    const Image content =
        uniform_image(3, 16, 16, 0.4, 0.6, 100 + std::uint64_t(trial));
    const Image style =
        uniform_image(3, 12, 12, 0.45, 0.55, 500 + std::uint64_t(trial));
    const Image out = backend->transfer(content, style);
    REQUIRE(out.shape == content.shape);
    for (int c = 0; c < 3; ++c) {
      const ChannelStats so = channel_stats(out.channel(c), out.shape.pixels());
      const ChannelStats ss =
          channel_stats(style.channel(c), style.shape.pixels());
      CHECK(so.mean == doctest::Approx(ss.mean).epsilon(1e-4));
      CHECK(so.stddev == doctest::Approx(ss.stddev).epsilon(1e-4));
    }
  }
}

TEST_CASE("self transfer is the identity") {
  const auto backend = make_moment_backend();
  const Image x = uniform_image(3, 16, 16, 0.1, 0.9, 7);
  const Image out = backend->transfer(x, x);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    CHECK(out.data[i] == doctest::Approx(x.data[i]).epsilon(1e-5));
}

TEST_CASE("moment transfer is idempotent for a fixed style") {
  const auto backend = make_moment_backend();
  const Image x = uniform_image(3, 16, 16, 0.3, 0.7, 8);
  const Image style = uniform_image(3, 16, 16, 0.4, 0.6, 9);
  const Image once = backend->transfer(x, style);
  const Image twice = backend->transfer(once, style);
  CHECK(mse(once, twice) < 1e-8);
}

TEST_CASE("zero-variance content channel maps to the style mean") {
  const auto backend = make_moment_backend();
  Image flat({1, 4, 4}, 0.2f);
  const Image style = uniform_image(1, 4, 4, 0.5, 0.7, 10);
  const ChannelStats ss = channel_stats(style.channel(0), 16);
  const Image out = backend->transfer(flat, style);
  for (float v : out.data) CHECK(v == doctest::Approx(ss.mean).epsilon(1e-5));
}

TEST_CASE("output is always clamped to the pixel range") {
  const auto backend = make_moment_backend();
  const Image content = uniform_image(3, 8, 8, 0.0, 1.0, 11);
  const Image style = uniform_image(3, 8, 8, 0.0, 1.0, 12);
  const Image out = backend->transfer(content, style);
  for (float v : out.data) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("channel count mismatch is rejected") {
  const auto backend = make_moment_backend();
  const Image rgb = uniform_image(3, 4, 4, 0.2, 0.8, 13);
  const Image gray = uniform_image(1, 4, 4, 0.2, 0.8, 14);
  CHECK_THROWS_AS(backend->transfer(rgb, gray), ValidationError);
}

TEST_CASE("full covariance variant aligns cross-channel structure") {
  const auto backend = make_moment_backend(/*full_covariance=*/true);
  const Image content = uniform_image(3, 24, 24, 0.35, 0.65, 15);
  // correlated style: r and g move together
  Image style({3, 24, 24});
  Rng rng(16);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x) {
      const float base = float(rng.uniform(0.4, 0.6));
      style.at(0, y, x) = base;
      style.at(1, y, x) = base + float(rng.uniform(-0.01, 0.01));
      style.at(2, y, x) = float(rng.uniform(0.4, 0.6));
    }
  const Image out = backend->transfer(content, style);
  auto corr = [](const Image& img, int a, int b) {
    const std::size_t n = img.shape.pixels();
    const ChannelStats sa = channel_stats(img.channel(a), n);
    const ChannelStats sb = channel_stats(img.channel(b), n);
    double cov = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      cov += (img.channel(a)[i] - sa.mean) * (img.channel(b)[i] - sb.mean);
    return cov / double(n) / (sa.stddev * sb.stddev);
  };
  CHECK(corr(style, 0, 1) > 0.9);
  CHECK(std::abs(corr(content, 0, 1)) < 0.3);
  CHECK(corr(out, 0, 1) > 0.8);  // inherited the style's correlation
}

TEST_CASE("feature backend requires its asset file") {
  const fs::path dir = fs::temp_directory_path() / "dr_style_asset";
  fs::remove_all(dir);
  fs::create_directories(dir);
  CHECK_THROWS_AS(make_feature_backend(dir / "missing.json"),
                  BackendUnavailableError);
  write_default_feature_asset(dir / "filters.json");
  const auto backend = make_feature_backend(dir / "filters.json");
  CHECK(backend->name() == "feature");

  const Image x = uniform_image(3, 32, 32, 0.2, 0.8, 17);
  const Image self = backend->transfer(x, x);
  CHECK(mse(x, self) < 1e-6);  // self statistics: near-perfect reconstruction

  const Image style = uniform_image(3, 32, 32, 0.4, 0.9, 18);
  const Image out = backend->transfer(x, style);
  CHECK(out.shape == x.shape);
  CHECK(mse(x, out) > 1e-5);  // actually moved toward the style
  for (float v : out.data) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("factory dispatches by name") {
  CHECK(make_backend("moment")->name() == "moment");
  const fs::path dir = fs::temp_directory_path() / "dr_style_asset2";
  fs::create_directories(dir);
  write_default_feature_asset(dir / "filters.json");
  CHECK(make_backend("feature", dir / "filters.json")->name() == "feature");
  CHECK_THROWS_AS(make_backend("vgg"), ConfigError);
}

TEST_CASE("free transfer helper clamps and delegates") {
  const auto backend = make_moment_backend();
  const Image content = uniform_image(3, 8, 8, 0.3, 0.7, 19);
  const Image style = uniform_image(3, 8, 8, 0.2, 0.6, 20);
  const Image a = transfer(content, style, *backend);
  const Image b = backend->transfer(content, style);
  CHECK(a.data == b.data);
}
