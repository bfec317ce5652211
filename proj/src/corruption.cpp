#include "deeprepair/corruption.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "deeprepair/errors.hpp"
#include "deeprepair/jpeg_codec.hpp"
#include "deeprepair/npy_io.hpp"

namespace deeprepair {
namespace {

// -------------------------------------------------------------------------
// Severity parameter tables for the natively synthesized kinds, sized for
// 32x32 images.  Values follow the common-corruptions reference for the
// noise/photometric/digital kinds; blur kernel parameters are our own
// documented choices.  This block is the single source of truth.
// -------------------------------------------------------------------------

// GN: additive Gaussian noise sigma
constexpr std::array<double, 5> kGaussianSigma = {0.08, 0.12, 0.18, 0.26, 0.38};
// SN: photons per unit intensity (lower = noisier)
constexpr std::array<double, 5> kShotPhotons = {60, 25, 12, 5, 3};
// IN: salt-and-pepper amount
constexpr std::array<double, 5> kImpulseAmount = {0.03, 0.06, 0.09, 0.17, 0.27};
// DB: (disk radius, alias blur sigma)
constexpr std::array<std::array<double, 2>, 5> kDefocus = {{
    {0.3, 0.4}, {0.4, 0.5}, {0.5, 0.6}, {1.0, 0.2}, {1.5, 0.1}}};
// MB: (kernel length, line blur sigma); direction drawn per call
constexpr std::array<std::array<double, 2>, 5> kMotion = {{
    {4, 1.0}, {5, 1.5}, {6, 2.0}, {7, 2.5}, {9, 3.0}}};
// BS: additive brightness offset
constexpr std::array<double, 5> kBrightness = {0.05, 0.10, 0.15, 0.20, 0.30};
// CT: contrast scale about the per-channel mean
constexpr std::array<double, 5> kContrast = {0.75, 0.50, 0.40, 0.30, 0.15};
// PIX: resize factor for the box down/up round trip
constexpr std::array<double, 5> kPixelate = {0.95, 0.90, 0.85, 0.75, 0.65};
// JPEG: encoder quality
constexpr std::array<double, 5> kJpegQuality = {80, 65, 58, 50, 40};

const std::map<std::string, CorruptionKind> kByCode = {
    {"GN", CorruptionKind::kGaussianNoise},
    {"SN", CorruptionKind::kShotNoise},
    {"IN", CorruptionKind::kImpulseNoise},
    {"DB", CorruptionKind::kDefocusBlur},
    {"GB", CorruptionKind::kGlassBlur},
    {"MB", CorruptionKind::kMotionBlur},
    {"ZM", CorruptionKind::kZoomBlur},
    {"SW", CorruptionKind::kSnow},
    {"FT", CorruptionKind::kFrost},
    {"FG", CorruptionKind::kFog},
    {"BS", CorruptionKind::kBrightness},
    {"CT", CorruptionKind::kContrast},
    {"ET", CorruptionKind::kElasticTransform},
    {"PIX", CorruptionKind::kPixelate},
    {"JPEG", CorruptionKind::kJpeg},
};

// 2D convolution with reflect-101 borders.
Image convolve(const Image& img, const std::vector<double>& kernel, int kh,
               int kw) {
  const int h = img.shape.height, w = img.shape.width;
  const int cy = kh / 2, cx = kw / 2;
  Image out(img.shape);
  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
  };
  for (int c = 0; c < img.shape.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int ky = 0; ky < kh; ++ky) {
          const int sy = reflect(y + ky - cy, h);
          for (int kx = 0; kx < kw; ++kx) {
            const int sx = reflect(x + kx - cx, w);
            acc += kernel[ky * kw + kx] * img.at(c, sy, sx);
          }
        }
        out.at(c, y, x) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

std::vector<double> disk_kernel(double radius, double alias_sigma, int& ksize) {
  const int r = std::max(2, static_cast<int>(std::ceil(radius)) + 2);
  ksize = 2 * r + 1;
  std::vector<double> k(static_cast<std::size_t>(ksize) * ksize, 0.0);
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x)
      if (y * y + x * x <= radius * radius + 1e-12)
        k[(y + r) * ksize + (x + r)] = 1.0;
  // soften the aliased disk edge with a small gaussian
  if (alias_sigma > 0.0) {
    const int gr = 2;
    std::vector<double> g(2 * gr + 1);
    double gs = 0.0;
    for (int i = -gr; i <= gr; ++i) {
      g[i + gr] = std::exp(-0.5 * i * i / (alias_sigma * alias_sigma));
      gs += g[i + gr];
    }
    for (double& v : g) v /= gs;
    std::vector<double> tmp(k.size(), 0.0);
    for (int y = 0; y < ksize; ++y)
      for (int x = 0; x < ksize; ++x)
        for (int i = -gr; i <= gr; ++i) {
          const int sx = std::clamp(x + i, 0, ksize - 1);
          tmp[y * ksize + x] += g[i + gr] * k[y * ksize + sx];
        }
    std::vector<double> tmp2(k.size(), 0.0);
    for (int y = 0; y < ksize; ++y)
      for (int x = 0; x < ksize; ++x)
        for (int i = -gr; i <= gr; ++i) {
          const int sy = std::clamp(y + i, 0, ksize - 1);
          tmp2[y * ksize + x] += g[i + gr] * tmp[sy * ksize + x];
        }
    k = tmp2;
  }
  double total = 0.0;
  for (double v : k) total += v;
  for (double& v : k) v /= total;
  return k;
}

std::vector<double> motion_kernel(double length, double sigma, double angle_rad,
                                  int& ksize) {
  const int r = std::max(1, static_cast<int>(std::ceil(length / 2.0)));
  ksize = 2 * r + 1;
  std::vector<double> k(static_cast<std::size_t>(ksize) * ksize, 0.0);
  const double dy = std::sin(angle_rad), dx = std::cos(angle_rad);
  // gaussian falloff along the motion line
  const int steps = 4 * ksize;
  for (int s = -steps; s <= steps; ++s) {
    const double t = length / 2.0 * s / steps;
    const double y = t * dy, x = t * dx;
    const int iy = static_cast<int>(std::lround(y)) + r;
    const int ix = static_cast<int>(std::lround(x)) + r;
    if (iy < 0 || iy >= ksize || ix < 0 || ix >= ksize) continue;
    k[iy * ksize + ix] += std::exp(-0.5 * t * t / (sigma * sigma));
  }
  double total = 0.0;
  for (double v : k) total += v;
  for (double& v : k) v /= total;
  return k;
}

Image pixelate(const Image& img, double factor) {
  const int h = img.shape.height, w = img.shape.width;
  const int dh = std::max(1, static_cast<int>(h * factor));
  const int dw = std::max(1, static_cast<int>(w * factor));
  if (dh == h && dw == w) return img;
  Image out(img.shape);
  for (int c = 0; c < img.shape.channels; ++c) {
    // box down-sample to (dh, dw)
    std::vector<double> small(static_cast<std::size_t>(dh) * dw, 0.0);
    for (int by = 0; by < dh; ++by) {
      const int y0 = by * h / dh, y1 = std::max(y0 + 1, (by + 1) * h / dh);
      for (int bx = 0; bx < dw; ++bx) {
        const int x0 = bx * w / dw, x1 = std::max(x0 + 1, (bx + 1) * w / dw);
        double acc = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) acc += img.at(c, y, x);
        small[by * dw + bx] = acc / ((y1 - y0) * (x1 - x0));
      }
    }
    // nearest up-sample back
    for (int y = 0; y < h; ++y) {
      const int by = std::min(dh - 1, y * dh / h);
      for (int x = 0; x < w; ++x) {
        const int bx = std::min(dw - 1, x * dw / w);
        out.at(c, y, x) = static_cast<float>(small[by * dw + bx]);
      }
    }
  }
  return out;
}

}  // namespace

std::string kind_code(CorruptionKind kind) {
  for (const auto& [code, k] : kByCode)
    if (k == kind) return code;
  throw ConfigError("corruption: unknown kind enum value");
}

CorruptionKind kind_from_code(const std::string& code) {
  const auto it = kByCode.find(code);
  if (it == kByCode.end())
    throw ConfigError("corruption: unknown kind code '" + code + "'");
  return it->second;
}

std::vector<CorruptionKind> all_corruption_kinds() {
  return {CorruptionKind::kGaussianNoise, CorruptionKind::kShotNoise,
          CorruptionKind::kImpulseNoise,  CorruptionKind::kDefocusBlur,
          CorruptionKind::kGlassBlur,     CorruptionKind::kMotionBlur,
          CorruptionKind::kZoomBlur,      CorruptionKind::kSnow,
          CorruptionKind::kFrost,         CorruptionKind::kFog,
          CorruptionKind::kBrightness,    CorruptionKind::kContrast,
          CorruptionKind::kElasticTransform, CorruptionKind::kPixelate,
          CorruptionKind::kJpeg};
}

bool is_synthesized(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::kGaussianNoise:
    case CorruptionKind::kShotNoise:
    case CorruptionKind::kImpulseNoise:
    case CorruptionKind::kDefocusBlur:
    case CorruptionKind::kMotionBlur:
    case CorruptionKind::kBrightness:
    case CorruptionKind::kContrast:
    case CorruptionKind::kPixelate:
    case CorruptionKind::kJpeg:
      return true;
    default:
      return false;
  }
}

void CorruptionSpec::validate() const {
  if (severity < 1 || severity > kNumSeverities)
    throw ConfigError("corruption: severity must be in 1..5, got " +
                      std::to_string(severity));
  kind_code(kind);  // throws on a bad enum value
}

std::vector<double> severity_params(CorruptionKind kind, int severity) {
  if (severity < 1 || severity > kNumSeverities)
    throw ConfigError("corruption: severity must be in 1..5");
  const int s = severity - 1;
  switch (kind) {
    case CorruptionKind::kGaussianNoise: return {kGaussianSigma[s]};
    case CorruptionKind::kShotNoise: return {kShotPhotons[s]};
    case CorruptionKind::kImpulseNoise: return {kImpulseAmount[s]};
    case CorruptionKind::kDefocusBlur: return {kDefocus[s][0], kDefocus[s][1]};
    case CorruptionKind::kMotionBlur: return {kMotion[s][0], kMotion[s][1]};
    case CorruptionKind::kBrightness: return {kBrightness[s]};
    case CorruptionKind::kContrast: return {kContrast[s]};
    case CorruptionKind::kPixelate: return {kPixelate[s]};
    case CorruptionKind::kJpeg: return {kJpegQuality[s]};
    default:
      throw UnsupportedKindError("corruption: kind " + kind_code(kind) +
                                 " has no native synthesizer; ingest "
                                 "precomputed data instead");
  }
}

Image apply_corruption(const Image& input, const CorruptionSpec& spec,
                       Rng& rng) {
  spec.validate();
  if (!is_synthesized(spec.kind))
    throw UnsupportedKindError("corruption: kind " + kind_code(spec.kind) +
                               " has no native synthesizer; ingest "
                               "precomputed data instead");
  const std::vector<double> p =
      spec.params.empty() ? severity_params(spec.kind, spec.severity)
                          : spec.params;
  Image out = input;
  switch (spec.kind) {
    case CorruptionKind::kGaussianNoise: {
      const double sigma = p.at(0);
      if (sigma > 0.0)
        for (float& v : out.data)
          v = static_cast<float>(v + rng.normal(0.0, sigma));
      break;
    }
    case CorruptionKind::kShotNoise: {
      const double photons = p.at(0);
      if (photons > 0.0)
        for (float& v : out.data)
          v = static_cast<float>(
              static_cast<double>(rng.poisson(v * photons)) / photons);
      break;
    }
    case CorruptionKind::kImpulseNoise: {
      const double amount = p.at(0);
      for (float& v : out.data) {
        if (rng.uniform() < amount) v = rng.uniform() < 0.5 ? 0.0f : 1.0f;
      }
      break;
    }
    case CorruptionKind::kDefocusBlur: {
      int ksize = 0;
      const std::vector<double> k = disk_kernel(p.at(0), p.at(1), ksize);
      out = convolve(input, k, ksize, ksize);
      break;
    }
    case CorruptionKind::kMotionBlur: {
      const double angle = rng.uniform(-M_PI / 4.0, M_PI / 4.0);
      int ksize = 0;
      const std::vector<double> k = motion_kernel(p.at(0), p.at(1), angle, ksize);
      out = convolve(input, k, ksize, ksize);
      break;
    }
    case CorruptionKind::kBrightness: {
      const float offset = static_cast<float>(p.at(0));
      for (float& v : out.data) v += offset;
      break;
    }
    case CorruptionKind::kContrast: {
      const double factor = p.at(0);
      for (int c = 0; c < out.shape.channels; ++c) {
        const ChannelStats st =
            channel_stats(out.channel(c), out.shape.pixels());
        float* px = out.channel(c);
        for (std::size_t i = 0; i < out.shape.pixels(); ++i)
          px[i] = static_cast<float>((px[i] - st.mean) * factor + st.mean);
      }
      break;
    }
    case CorruptionKind::kPixelate:
      out = pixelate(input, p.at(0));
      break;
    case CorruptionKind::kJpeg:
      out = jpeg_roundtrip(input, static_cast<int>(p.at(0)));
      break;
    default:
      break;  // unreachable, guarded above
  }
  clamp01(out);
  return out;
}

LabelledDataset ingest_corrupted(const std::filesystem::path& path,
                                 CorruptionKind kind,
                                 const std::vector<int>& severities,
                                 const LabelledDataset& clean_test) {
  std::vector<std::size_t> shape;
  const std::vector<std::uint8_t> raw = read_npy_u8(path, shape);
  if (shape.size() != 4)
    throw ValidationError("ingest: expected rank-4 array in " + path.string());
  const std::size_t n = clean_test.size();
  if (shape[0] != kNumSeverities * n)
    throw ValidationError(
        "ingest: " + path.string() + " has " + std::to_string(shape[0]) +
        " images, expected 5 x " + std::to_string(n) +
        " to match the clean test labels");
  const int h = static_cast<int>(shape[1]);
  const int w = static_cast<int>(shape[2]);
  const int ch = static_cast<int>(shape[3]);
  if (h != clean_test.shape.height || w != clean_test.shape.width ||
      ch != clean_test.shape.channels)
    throw ValidationError("ingest: image shape mismatch in " + path.string());

  LabelledDataset out;
  out.shape = clean_test.shape;
  out.num_classes = clean_test.num_classes;
  out.name = "ingested_" + kind_code(kind);
  const std::size_t img_elems = static_cast<std::size_t>(h) * w * ch;
  for (int sev : severities) {
    if (sev < 1 || sev > kNumSeverities)
      throw ConfigError("ingest: severity out of range");
    const std::size_t block = static_cast<std::size_t>(sev - 1) * n;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t* src = raw.data() + (block + i) * img_elems;
      Image img(out.shape);
      // HWC u8 -> CHW float
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          for (int c = 0; c < ch; ++c)
            img.at(c, y, x) =
                static_cast<float>(src[(static_cast<std::size_t>(y) * w + x) * ch + c]) /
                255.0f;
      out.append(img, clean_test.labels[i]);
    }
  }
  out.validate();
  return out;
}

LabelledDataset build_corrupted_testset(
    const LabelledDataset& clean_test, CorruptionKind kind, std::uint64_t seed,
    const std::optional<std::filesystem::path>& ingest_dir) {
  if (!is_synthesized(kind)) {
    if (!ingest_dir)
      throw UnsupportedKindError(
          "corruption: kind " + kind_code(kind) +
          " requires ingested data but no ingest directory was given");
    const std::filesystem::path file = *ingest_dir / (kind_code(kind) + ".npy");
    return ingest_corrupted(file, kind, {1, 2, 3, 4, 5}, clean_test);
  }

  LabelledDataset out;
  out.shape = clean_test.shape;
  out.num_classes = clean_test.num_classes;
  out.name = "corrupted_" + kind_code(kind);
  out.images.reserve(clean_test.images.size() * kNumSeverities);
  const Rng base(seed);
  const std::uint64_t kind_key = static_cast<std::uint64_t>(kind);
  for (int sev = 1; sev <= kNumSeverities; ++sev) {
    CorruptionSpec spec{kind, sev, {}, CorruptionSource::kSynthesized};
    for (std::size_t i = 0; i < clean_test.size(); ++i) {
      Rng rng = base.stream(kind_key, static_cast<std::uint64_t>(sev), i);
      out.append(apply_corruption(clean_test.image(i), spec, rng),
                 clean_test.labels[i]);
    }
  }
  return out;
}

}  // namespace deeprepair
