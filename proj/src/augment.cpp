#include "deeprepair/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "deeprepair/errors.hpp"
#include "deeprepair/kernels.hpp"

namespace deeprepair {
namespace {

// Magnitude sampling ranges for the base operations (single source of
// truth; AugMix-style maxima for 32x32 inputs).
constexpr double kMaxRotateDeg = 30.0;
constexpr double kMaxShear = 0.3;
constexpr double kMaxTranslateFrac = 1.0 / 3.0;  // of width/height
constexpr int kMinPosterizeBits = 4;             // sampled in [4, 8]
constexpr double kMinSolarizeThreshold = 0.5;    // sampled in [0.5, 1]

const std::array<const char*, 9> kBaseNames = {
    "autocontrast", "equalize",    "posterize",
    "rotate",       "solarize",    "shear-x",
    "shear-y",      "translate-x", "translate-y"};

// Inverse-mapped affine resample with bilinear interpolation and zero
// fill, about the image center.  Maps output (x,y) to source
// (a*x + b*y + tx, c*x + d*y + ty) in centered coordinates.
Image affine(const Image& img, double a, double b, double c, double d,
             double tx, double ty) {
  const int h = img.shape.height, w = img.shape.width;
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  Image out(img.shape);
  for (int y = 0; y < h; ++y) {
    const double yc = y - cy;
    for (int x = 0; x < w; ++x) {
      const double xc = x - cx;
      const double sx = a * xc + b * yc + tx + cx;
      const double sy = c * xc + d * yc + ty + cy;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0, fy = sy - y0;
      for (int ch = 0; ch < img.shape.channels; ++ch) {
        auto sample = [&](int yy, int xx) -> double {
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) return 0.0;
          return img.at(ch, yy, xx);
        };
        const double v =
            (1 - fy) * ((1 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
            fy * ((1 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
        out.at(ch, y, x) = static_cast<float>(v);
      }
    }
  }
  return out;
}

}  // namespace

Image autocontrast(const Image& img) {
  Image out = img;
  for (int c = 0; c < img.shape.channels; ++c) {
    float lo = 1.0f, hi = 0.0f;
    const float* src = img.channel(c);
    for (std::size_t i = 0; i < img.shape.pixels(); ++i) {
      lo = std::min(lo, src[i]);
      hi = std::max(hi, src[i]);
    }
    float* dst = out.channel(c);
    if (hi - lo < 1e-6f) continue;  // flat channel left unchanged
    const float scale = 1.0f / (hi - lo);
    for (std::size_t i = 0; i < img.shape.pixels(); ++i)
      dst[i] = (src[i] - lo) * scale;
  }
  return out;
}

Image equalize(const Image& img) {
  Image out = img;
  for (int c = 0; c < img.shape.channels; ++c) {
    const float* src = img.channel(c);
    const std::size_t n = img.shape.pixels();
    std::array<std::size_t, 256> hist{};
    for (std::size_t i = 0; i < n; ++i) {
      const int b = std::clamp(static_cast<int>(std::lround(src[i] * 255.0f)),
                               0, 255);
      ++hist[b];
    }
    std::array<std::size_t, 256> cdf{};
    std::size_t acc = 0;
    for (int b = 0; b < 256; ++b) {
      acc += hist[b];
      cdf[b] = acc;
    }
    std::size_t cdf_min = 0;
    for (int b = 0; b < 256; ++b)
      if (hist[b] != 0) {
        cdf_min = cdf[b];
        break;
      }
    if (n == cdf_min) continue;  // constant channel
    float* dst = out.channel(c);
    const double denom = static_cast<double>(n - cdf_min);
    for (std::size_t i = 0; i < n; ++i) {
      const int b = std::clamp(static_cast<int>(std::lround(src[i] * 255.0f)),
                               0, 255);
      dst[i] = static_cast<float>((cdf[b] - cdf_min) / denom);
    }
  }
  return out;
}

Image posterize(const Image& img, int bits) {
  if (bits < 1 || bits > 8)
    throw ConfigError("posterize: bits must be in [1,8], got " +
                      std::to_string(bits));
  if (bits == 8) return img;  // full bit depth: nothing to drop
  const unsigned mask = 0xFFu << (8 - bits);
  Image out = img;
  for (float& v : out.data) {
    const unsigned q = static_cast<unsigned>(
        std::clamp(static_cast<int>(std::lround(v * 255.0f)), 0, 255));
    v = static_cast<float>(q & mask) / 255.0f;
  }
  return out;
}

Image rotate(const Image& img, double degrees) {
  if (std::abs(degrees) > 180.0)
    throw ConfigError("rotate: |degrees| must be <= 180");
  if (degrees == 0.0) return img;
  const double rad = degrees * M_PI / 180.0;
  // inverse rotation for output->source mapping
  const double cs = std::cos(rad), sn = std::sin(rad);
  return affine(img, cs, sn, -sn, cs, 0.0, 0.0);
}

Image solarize(const Image& img, double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw ConfigError("solarize: threshold must be in [0,1]");
  Image out = img;
  const float th = static_cast<float>(threshold);
  for (float& v : out.data)
    if (v >= th) v = 1.0f - v;
  return out;
}

Image shear_x(const Image& img, double factor) {
  if (std::abs(factor) > 1.0) throw ConfigError("shear-x: |factor| must be <= 1");
  if (factor == 0.0) return img;
  return affine(img, 1.0, factor, 0.0, 1.0, 0.0, 0.0);
}

Image shear_y(const Image& img, double factor) {
  if (std::abs(factor) > 1.0) throw ConfigError("shear-y: |factor| must be <= 1");
  if (factor == 0.0) return img;
  return affine(img, 1.0, 0.0, factor, 1.0, 0.0, 0.0);
}

Image translate_x(const Image& img, double pixels) {
  if (std::abs(pixels) > img.shape.width)
    throw ConfigError("translate-x: |pixels| must be <= width");
  if (pixels == 0.0) return img;
  return affine(img, 1.0, 0.0, 0.0, 1.0, -pixels, 0.0);
}

Image translate_y(const Image& img, double pixels) {
  if (std::abs(pixels) > img.shape.height)
    throw ConfigError("translate-y: |pixels| must be <= height");
  if (pixels == 0.0) return img;
  return affine(img, 1.0, 0.0, 0.0, 1.0, 0.0, -pixels);
}

void OperationSet::validate() const {
  std::multiset<std::string> names;
  for (const auto& op : base) {
    if (op.kind != OpKind::kBase)
      throw ConfigError("operation set: style op listed among base ops");
    names.insert(op.name);
  }
  const std::multiset<std::string> expected(kBaseNames.begin(),
                                            kBaseNames.end());
  if (names != expected)
    throw ConfigError("operation set: base ops must be exactly the canonical 9");
  for (const auto& op : style)
    if (op.kind != OpKind::kStyle)
      throw ConfigError("operation set: base op listed among style ops");
}

OperationSet make_base_operations() {
  OperationSet ops;
  auto add = [&ops](const char* name,
                    std::function<Image(const Image&, Rng&)> fn) {
    ops.base.push_back({name, OpKind::kBase, std::move(fn)});
  };
  add("autocontrast", [](const Image& x, Rng&) { return autocontrast(x); });
  add("equalize", [](const Image& x, Rng&) { return equalize(x); });
  add("posterize", [](const Image& x, Rng& rng) {
    return posterize(x, static_cast<int>(rng.uniform_int(kMinPosterizeBits, 8)));
  });
  add("rotate", [](const Image& x, Rng& rng) {
    return rotate(x, rng.uniform(-kMaxRotateDeg, kMaxRotateDeg));
  });
  add("solarize", [](const Image& x, Rng& rng) {
    return solarize(x, rng.uniform(kMinSolarizeThreshold, 1.0));
  });
  add("shear-x", [](const Image& x, Rng& rng) {
    return shear_x(x, rng.uniform(-kMaxShear, kMaxShear));
  });
  add("shear-y", [](const Image& x, Rng& rng) {
    return shear_y(x, rng.uniform(-kMaxShear, kMaxShear));
  });
  add("translate-x", [](const Image& x, Rng& rng) {
    const double m = x.shape.width * kMaxTranslateFrac;
    return translate_x(x, rng.uniform(-m, m));
  });
  add("translate-y", [](const Image& x, Rng& rng) {
    const double m = x.shape.height * kMaxTranslateFrac;
    return translate_y(x, rng.uniform(-m, m));
  });
  return ops;
}

AugOperation make_style_op(const SamplingDistribution& sampling,
                           std::shared_ptr<const LabelledDataset> guidance,
                           std::shared_ptr<const StyleBackend> backend,
                           int fixed_reference) {
  sampling.validate();
  if (!guidance || guidance->size() != sampling.probs.size())
    throw ConfigError("style op: sampling distribution does not match guidance");
  if (!backend) throw ConfigError("style op: null backend");

  AugOperation op;
  op.kind = OpKind::kStyle;
  if (fixed_reference >= 0) {
    if (!sampling.cluster_model)
      throw ConfigError("style op: fixed references need a cluster model");
    const ClusterModel& m = *sampling.cluster_model;
    if (fixed_reference >= m.n_clusters)
      throw ConfigError("style op: fixed reference cluster out of range");
    // member of this cluster nearest its center
    std::size_t ref = 0;
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 0; i < guidance->size(); ++i) {
      if (m.assignments[i] != fixed_reference) continue;
      const double d = m.member_distance(*guidance, i);
      if (d < best) {
        best = d;
        ref = i;
        found = true;
      }
    }
    if (!found) throw ConfigError("style op: empty cluster for fixed reference");
    op.name = "style-fixed-" + std::to_string(fixed_reference);
    op.apply = [guidance, backend, ref](const Image& x, Rng&) {
      return backend->transfer(x, guidance->image(ref));
    };
  } else {
    op.name = "style";
    op.apply = [sampling, guidance, backend](const Image& x, Rng& rng) {
      const std::size_t ref = sample_reference(sampling, rng);
      return backend->transfer(x, guidance->image(ref));
    };
  }
  return op;
}

void add_style_ops(OperationSet& ops, const SamplingDistribution& sampling,
                   std::shared_ptr<const LabelledDataset> guidance,
                   std::shared_ptr<const StyleBackend> backend,
                   int n_ops, bool fixed_references) {
  for (int i = 0; i < n_ops; ++i)
    ops.style.push_back(make_style_op(sampling, guidance, backend,
                                      fixed_references ? i : -1));
}

Image style_aug(const Image& x, const OperationSet& ops, Rng& rng, int m_width,
                double alpha, StyleAugTrace* trace) {
  if (m_width < 1) throw ConfigError("style_aug: M must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("style_aug: alpha must be > 0");
  if (ops.base.empty())
    throw ConfigError("style_aug: operation set has no base operations");
  const std::size_t total_ops = ops.base.size() + ops.style.size();

  std::vector<double> weights(m_width);
  rng.dirichlet(alpha, static_cast<std::size_t>(m_width), weights.data());

  if (trace != nullptr) {
    trace->mix_weights = weights;
    trace->chains.clear();
  }

  // Accumulate w_m * (chain(X) - X); adding X back at the end keeps the
  // all-identity case exact.
  std::vector<double> acc(x.data.size(), 0.0);
  for (int m = 0; m < m_width; ++m) {
    const auto pick_any = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<long>(total_ops) - 1));
    const AugOperation& op1 = pick_any < ops.base.size()
                                  ? ops.base[pick_any]
                                  : ops.style[pick_any - ops.base.size()];
    const AugOperation& op2 = ops.base[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<long>(ops.base.size()) - 1))];
    const AugOperation& op3 = ops.base[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<long>(ops.base.size()) - 1))];
    const int depth = static_cast<int>(rng.uniform_int(1, 3));

    ChainTrace chain;
    chain.weight = weights[m];
    Image img = op1.apply(x, rng);
    chain.op_names.push_back(op1.name);
    chain.op_kinds.push_back(op1.kind);
    if (depth >= 2) {
      img = op2.apply(img, rng);
      chain.op_names.push_back(op2.name);
      chain.op_kinds.push_back(op2.kind);
    }
    if (depth >= 3) {
      img = op3.apply(img, rng);
      chain.op_names.push_back(op3.name);
      chain.op_kinds.push_back(op3.kind);
    }
    for (std::size_t i = 0; i < acc.size(); ++i)
      acc[i] += weights[m] *
                (static_cast<double>(img.data[i]) - static_cast<double>(x.data[i]));
    if (trace != nullptr) trace->chains.push_back(std::move(chain));
  }

  const double w0 = rng.beta(alpha, alpha);
  if (trace != nullptr) trace->blend_weight = w0;

  Image out = x;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = static_cast<float>(out.data[i] + w0 * acc[i]);
  clamp01(out);
  return out;
}

Image cutout(const Image& img, int patch_size, Rng& rng) {
  if (patch_size < 0 || patch_size > img.shape.height ||
      patch_size > img.shape.width)
    throw ConfigError("cutout: patch size must fit inside the image");
  Image out = img;
  if (patch_size == 0) return out;
  const int cy = static_cast<int>(rng.uniform_int(0, img.shape.height - 1));
  const int cx = static_cast<int>(rng.uniform_int(0, img.shape.width - 1));
  const int y0 = std::max(0, cy - patch_size / 2);
  const int y1 = std::min(img.shape.height, y0 + patch_size);
  const int x0 = std::max(0, cx - patch_size / 2);
  const int x1 = std::min(img.shape.width, x0 + patch_size);
  for (int c = 0; c < img.shape.channels; ++c)
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) out.at(c, y, x) = 0.0f;
  return out;
}

namespace {

std::vector<double> one_hot(int label, int num_classes) {
  std::vector<double> v(num_classes, 0.0);
  v[label] = 1.0;
  return v;
}

}  // namespace

MixedBatch mixup(const std::vector<Image>& batch, const std::vector<int>& labels,
                 int num_classes, double alpha, Rng& rng) {
  if (batch.size() != labels.size())
    throw ConfigError("mixup: batch/label size mismatch");
  const double lambda = alpha > 0.0 ? rng.beta(alpha, alpha) : 1.0;
  const std::vector<std::size_t> perm = rng.permutation(batch.size());
  MixedBatch out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Image& a = batch[i];
    const Image& b = batch[perm[i]];
    Image mixed(a.shape);
    kernels::blend(a.data.size(), static_cast<float>(lambda), a.data.data(),
                   static_cast<float>(1.0 - lambda), b.data.data(),
                   mixed.data.data());
    out.images.push_back(std::move(mixed));
    std::vector<double> soft = one_hot(labels[i], num_classes);
    for (int c = 0; c < num_classes; ++c) soft[c] *= lambda;
    soft[labels[perm[i]]] += 1.0 - lambda;
    out.soft_labels.push_back(std::move(soft));
  }
  return out;
}

double cutmix_paste(Image& base, const Image& patch_src, const CutBox& box) {
  if (!(base.shape == patch_src.shape))
    throw ConfigError("cutmix: shape mismatch");
  if (box.y0 < 0 || box.x0 < 0 || box.h < 0 || box.w < 0 ||
      box.y0 + box.h > base.shape.height || box.x0 + box.w > base.shape.width)
    throw ConfigError("cutmix: box does not fit inside the image");
  for (int c = 0; c < base.shape.channels; ++c)
    for (int y = box.y0; y < box.y0 + box.h; ++y)
      for (int x = box.x0; x < box.x0 + box.w; ++x)
        base.at(c, y, x) = patch_src.at(c, y, x);
  return static_cast<double>(box.h) * box.w /
         (static_cast<double>(base.shape.height) * base.shape.width);
}

MixedBatch cutmix(const std::vector<Image>& batch,
                  const std::vector<int>& labels, int num_classes, double alpha,
                  Rng& rng) {
  if (batch.size() != labels.size())
    throw ConfigError("cutmix: batch/label size mismatch");
  const double lambda = alpha > 0.0 ? rng.beta(alpha, alpha) : 1.0;
  const std::vector<std::size_t> perm = rng.permutation(batch.size());
  MixedBatch out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Image mixed = batch[i];
    const Image& other = batch[perm[i]];
    const int h = mixed.shape.height, w = mixed.shape.width;
    const double cut = std::sqrt(1.0 - lambda);
    CutBox box;
    box.h = static_cast<int>(std::lround(h * cut));
    box.w = static_cast<int>(std::lround(w * cut));
    box.y0 = box.h < h
                 ? static_cast<int>(rng.uniform_int(0, h - box.h))
                 : 0;
    box.x0 = box.w < w
                 ? static_cast<int>(rng.uniform_int(0, w - box.w))
                 : 0;
    const double frac = cutmix_paste(mixed, other, box);
    out.images.push_back(std::move(mixed));
    std::vector<double> soft = one_hot(labels[i], num_classes);
    for (int c = 0; c < num_classes; ++c) soft[c] *= 1.0 - frac;
    soft[labels[perm[i]]] += frac;
    out.soft_labels.push_back(std::move(soft));
  }
  return out;
}

}  // namespace deeprepair
