#include "deeprepair/style_transfer.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <vector>

#include "json.hpp"

#include "deeprepair/errors.hpp"

namespace deeprepair {

using nlohmann::json;

namespace {

constexpr double kSigmaFloor = 1e-6;

// ---------------------------------------------------------------------
// Moment matching backend
// ---------------------------------------------------------------------

// Jacobi eigendecomposition for small symmetric matrices.
void sym_eig(const std::vector<double>& a, int n, std::vector<double>& vecs,
             std::vector<double>& vals) {
  std::vector<double> m = a;
  vecs.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) vecs[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += m[p * n + q] * m[p * n + q];
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(m[p * n + q]) < 1e-18) continue;
        const double theta =
            (m[q * n + q] - m[p * n + p]) / (2.0 * m[p * n + q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m[k * n + p], mkq = m[k * n + q];
          m[k * n + p] = c * mkp - s * mkq;
          m[k * n + q] = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m[p * n + k], mqk = m[q * n + k];
          m[p * n + k] = c * mpk - s * mqk;
          m[q * n + k] = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = vecs[k * n + p], vkq = vecs[k * n + q];
          vecs[k * n + p] = c * vkp - s * vkq;
          vecs[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  vals.resize(n);
  for (int i = 0; i < n; ++i) vals[i] = m[i * n + i];
}

// A^power for symmetric PSD A (power +-1/2 here).
std::vector<double> sym_pow(const std::vector<double>& a, int n, double power) {
  std::vector<double> vecs, vals;
  sym_eig(a, n, vecs, vals);
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double lam = std::max(vals[k], 1e-12);
    const double f = std::pow(lam, power);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out[i * n + j] += f * vecs[i * n + k] * vecs[j * n + k];
  }
  return out;
}

class MomentBackend final : public StyleBackend {
 public:
  explicit MomentBackend(bool full_covariance)
      : full_covariance_(full_covariance) {}

  std::string name() const override {
    return full_covariance_ ? "moment-cov" : "moment";
  }

  Image transfer(const Image& content, const Image& style) const override {
    if (content.shape.channels != style.shape.channels)
      throw ValidationError("style: channel count mismatch (" +
                            std::to_string(content.shape.channels) + " vs " +
                            std::to_string(style.shape.channels) + ")");
    Image out = full_covariance_ ? transfer_cov(content, style)
                                 : transfer_diag(content, style);
    clamp01(out);
    return out;
  }

 private:
  static Image transfer_diag(const Image& content, const Image& style) {
    Image out = content;
    for (int c = 0; c < content.shape.channels; ++c) {
      const ChannelStats cs =
          channel_stats(content.channel(c), content.shape.pixels());
      const ChannelStats ss =
          channel_stats(style.channel(c), style.shape.pixels());
      float* px = out.channel(c);
      const std::size_t n = out.shape.pixels();
      if (cs.stddev < kSigmaFloor) {
        // zero-variance content: constant at the style mean
        for (std::size_t i = 0; i < n; ++i)
          px[i] = static_cast<float>(ss.mean);
      } else {
        const double scale = ss.stddev / cs.stddev;
        for (std::size_t i = 0; i < n; ++i)
          px[i] = static_cast<float>((px[i] - cs.mean) * scale + ss.mean);
      }
    }
    return out;
  }

  static void covariance(const Image& img, std::vector<double>& mean,
                         std::vector<double>& cov) {
    const int ch = img.shape.channels;
    const std::size_t n = img.shape.pixels();
    mean.assign(ch, 0.0);
    cov.assign(static_cast<std::size_t>(ch) * ch, 0.0);
    for (int c = 0; c < ch; ++c)
      mean[c] = channel_stats(img.channel(c), n).mean;
    for (std::size_t i = 0; i < n; ++i) {
      for (int a = 0; a < ch; ++a) {
        const double da = img.channel(a)[i] - mean[a];
        for (int b = a; b < ch; ++b)
          cov[a * ch + b] += da * (img.channel(b)[i] - mean[b]);
      }
    }
    for (int a = 0; a < ch; ++a)
      for (int b = 0; b < ch; ++b) {
        if (b < a) {
          cov[a * ch + b] = cov[b * ch + a];
        } else {
          cov[a * ch + b] /= static_cast<double>(n);
        }
      }
  }

  static Image transfer_cov(const Image& content, const Image& style) {
    const int ch = content.shape.channels;
    std::vector<double> mu_c, cov_c, mu_s, cov_s;
    covariance(content, mu_c, cov_c);
    covariance(style, mu_s, cov_s);
    const std::vector<double> whiten = sym_pow(cov_c, ch, -0.5);
    const std::vector<double> color = sym_pow(cov_s, ch, 0.5);
    // T = color * whiten
    std::vector<double> t(static_cast<std::size_t>(ch) * ch, 0.0);
    for (int i = 0; i < ch; ++i)
      for (int k = 0; k < ch; ++k)
        for (int j = 0; j < ch; ++j)
          t[i * ch + j] += color[i * ch + k] * whiten[k * ch + j];

    Image out = content;
    const std::size_t n = content.shape.pixels();
    std::vector<double> v(ch);
    for (std::size_t i = 0; i < n; ++i) {
      for (int a = 0; a < ch; ++a) v[a] = content.channel(a)[i] - mu_c[a];
      for (int a = 0; a < ch; ++a) {
        double acc = mu_s[a];
        for (int b = 0; b < ch; ++b) acc += t[a * ch + b] * v[b];
        out.channel(a)[i] = static_cast<float>(acc);
      }
    }
    return out;
  }

  bool full_covariance_;
};

// ---------------------------------------------------------------------
// Wavelet feature backend
// ---------------------------------------------------------------------

struct FilterBank {
  std::vector<double> analysis_lo, analysis_hi;
  std::vector<double> synthesis_lo, synthesis_hi;
  int levels = 2;
};

// One analysis step along a row of length n (periodic extension).
void analyze_1d(const std::vector<double>& x, const FilterBank& fb,
                std::vector<double>& lo, std::vector<double>& hi) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  lo.assign(half, 0.0);
  hi.assign(half, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    for (std::size_t k = 0; k < fb.analysis_lo.size(); ++k)
      lo[i] += fb.analysis_lo[k] * x[(2 * i + k) % n];
    for (std::size_t k = 0; k < fb.analysis_hi.size(); ++k)
      hi[i] += fb.analysis_hi[k] * x[(2 * i + k) % n];
  }
}

void synthesize_1d(const std::vector<double>& lo, const std::vector<double>& hi,
                   const FilterBank& fb, std::vector<double>& x) {
  const std::size_t n = lo.size() * 2;
  x.assign(n, 0.0);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    for (std::size_t k = 0; k < fb.synthesis_lo.size(); ++k)
      x[(2 * i + k) % n] += lo[i] * fb.synthesis_lo[k];
    for (std::size_t k = 0; k < fb.synthesis_hi.size(); ++k)
      x[(2 * i + k) % n] += hi[i] * fb.synthesis_hi[k];
  }
}

using Plane = std::vector<std::vector<double>>;  // [y][x]

void analyze_2d(const Plane& in, const FilterBank& fb, Plane& ll, Plane& lh,
                Plane& hl, Plane& hh) {
  const std::size_t h = in.size(), w = in[0].size();
  // rows
  Plane row_lo(h), row_hi(h);
  for (std::size_t y = 0; y < h; ++y) analyze_1d(in[y], fb, row_lo[y], row_hi[y]);
  // columns
  const std::size_t hw = w / 2, hh_ = h / 2;
  ll.assign(hh_, std::vector<double>(hw));
  lh.assign(hh_, std::vector<double>(hw));
  hl.assign(hh_, std::vector<double>(hw));
  hh.assign(hh_, std::vector<double>(hw));
  std::vector<double> col(h), clo, chi;
  for (std::size_t x = 0; x < hw; ++x) {
    for (std::size_t y = 0; y < h; ++y) col[y] = row_lo[y][x];
    analyze_1d(col, fb, clo, chi);
    for (std::size_t y = 0; y < hh_; ++y) {
      ll[y][x] = clo[y];
      lh[y][x] = chi[y];
    }
    for (std::size_t y = 0; y < h; ++y) col[y] = row_hi[y][x];
    analyze_1d(col, fb, clo, chi);
    for (std::size_t y = 0; y < hh_; ++y) {
      hl[y][x] = clo[y];
      hh[y][x] = chi[y];
    }
  }
}

void synthesize_2d(const Plane& ll, const Plane& lh, const Plane& hl,
                   const Plane& hh, const FilterBank& fb, Plane& out) {
  const std::size_t hh_ = ll.size(), hw = ll[0].size();
  const std::size_t h = hh_ * 2, w = hw * 2;
  Plane row_lo(h, std::vector<double>(hw)), row_hi(h, std::vector<double>(hw));
  std::vector<double> clo(hh_), chi(hh_), col;
  for (std::size_t x = 0; x < hw; ++x) {
    for (std::size_t y = 0; y < hh_; ++y) {
      clo[y] = ll[y][x];
      chi[y] = lh[y][x];
    }
    synthesize_1d(clo, chi, fb, col);
    for (std::size_t y = 0; y < h; ++y) row_lo[y][x] = col[y];
    for (std::size_t y = 0; y < hh_; ++y) {
      clo[y] = hl[y][x];
      chi[y] = hh[y][x];
    }
    synthesize_1d(clo, chi, fb, col);
    for (std::size_t y = 0; y < h; ++y) row_hi[y][x] = col[y];
  }
  out.assign(h, std::vector<double>(w));
  std::vector<double> row;
  for (std::size_t y = 0; y < h; ++y) {
    synthesize_1d(row_lo[y], row_hi[y], fb, row);
    out[y] = row;
  }
}

struct Subbands {
  std::vector<std::array<Plane, 3>> detail;  // per level: LH, HL, HH
  Plane ll;                                  // coarsest approximation
};

Subbands decompose(const Plane& img, const FilterBank& fb) {
  Subbands sb;
  Plane cur = img;
  for (int level = 0; level < fb.levels; ++level) {
    Plane ll, lh, hl, hh;
    analyze_2d(cur, fb, ll, lh, hl, hh);
    sb.detail.push_back({std::move(lh), std::move(hl), std::move(hh)});
    cur = std::move(ll);
  }
  sb.ll = std::move(cur);
  return sb;
}

Plane reconstruct(const Subbands& sb, const FilterBank& fb) {
  Plane cur = sb.ll;
  for (int level = fb.levels - 1; level >= 0; --level) {
    Plane out;
    synthesize_2d(cur, sb.detail[level][0], sb.detail[level][1],
                  sb.detail[level][2], fb, out);
    cur = std::move(out);
  }
  return cur;
}

void plane_stats(const Plane& p, double& mean, double& stddev) {
  double s = 0.0, ss = 0.0;
  std::size_t n = 0;
  for (const auto& row : p)
    for (double v : row) {
      s += v;
      ss += v * v;
      ++n;
    }
  mean = s / static_cast<double>(n);
  const double var = ss / static_cast<double>(n) - mean * mean;
  stddev = var > 0.0 ? std::sqrt(var) : 0.0;
}

void match_plane(Plane& content, const Plane& style) {
  double mc, sc, ms, ss;
  plane_stats(content, mc, sc);
  plane_stats(style, ms, ss);
  for (auto& row : content)
    for (double& v : row) {
      if (sc < kSigmaFloor) {
        v = ms;
      } else {
        v = (v - mc) / sc * ss + ms;
      }
    }
}

class WaveletBackend final : public StyleBackend {
 public:
  explicit WaveletBackend(FilterBank fb) : fb_(std::move(fb)) {}

  std::string name() const override { return "feature"; }

  Image transfer(const Image& content, const Image& style) const override {
    if (content.shape.channels != style.shape.channels)
      throw ValidationError("style: channel count mismatch");
    check_dims(content.shape);
    check_dims(style.shape);
    Image out = content;
    for (int c = 0; c < content.shape.channels; ++c) {
      Subbands sc = decompose(to_plane(content, c), fb_);
      const Subbands ss = decompose(to_plane(style, c), fb_);
      for (int lv = 0; lv < fb_.levels; ++lv)
        for (int b = 0; b < 3; ++b)
          match_plane(sc.detail[lv][b], ss.detail[lv][b]);
      match_plane(sc.ll, ss.ll);
      const Plane rec = reconstruct(sc, fb_);
      for (int y = 0; y < content.shape.height; ++y)
        for (int x = 0; x < content.shape.width; ++x)
          out.at(c, y, x) = static_cast<float>(rec[y][x]);
    }
    clamp01(out);
    return out;
  }

 private:
  void check_dims(const ImageShape& s) const {
    const int div = 1 << fb_.levels;
    if (s.height % div != 0 || s.width % div != 0)
      throw ValidationError("style: image dimensions must be divisible by 2^" +
                            std::to_string(fb_.levels));
  }

  static Plane to_plane(const Image& img, int c) {
    Plane p(img.shape.height, std::vector<double>(img.shape.width));
    for (int y = 0; y < img.shape.height; ++y)
      for (int x = 0; x < img.shape.width; ++x) p[y][x] = img.at(c, y, x);
    return p;
  }

  FilterBank fb_;
};

}  // namespace

std::unique_ptr<StyleBackend> make_moment_backend(bool full_covariance) {
  return std::make_unique<MomentBackend>(full_covariance);
}

void write_default_feature_asset(const std::filesystem::path& path) {
  const double r = 1.0 / std::sqrt(2.0);
  json j;
  j["type"] = "wavelet_stats";
  j["levels"] = 2;
  j["analysis_lo"] = {r, r};
  j["analysis_hi"] = {r, -r};
  j["synthesis_lo"] = {r, r};
  j["synthesis_hi"] = {r, -r};
  std::ofstream out(path);
  if (!out) throw LoadError("style: cannot write asset " + path.string());
  out << j.dump(2) << "\n";
}

std::unique_ptr<StyleBackend> make_feature_backend(
    const std::filesystem::path& asset_path) {
  if (asset_path.empty() || !std::filesystem::exists(asset_path))
    throw BackendUnavailableError(
        "style: feature backend asset not found at '" + asset_path.string() +
        "'; use the moment backend or provide style.asset");
  std::ifstream in(asset_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw LoadError("style: malformed asset " + asset_path.string() + ": " +
                    e.what());
  }
  FilterBank fb;
  fb.levels = j.value("levels", 2);
  fb.analysis_lo = j.at("analysis_lo").get<std::vector<double>>();
  fb.analysis_hi = j.at("analysis_hi").get<std::vector<double>>();
  fb.synthesis_lo = j.at("synthesis_lo").get<std::vector<double>>();
  fb.synthesis_hi = j.at("synthesis_hi").get<std::vector<double>>();
  if (fb.levels < 1 || fb.analysis_lo.empty() || fb.analysis_hi.empty())
    throw LoadError("style: invalid filter bank in " + asset_path.string());
  return std::make_unique<WaveletBackend>(std::move(fb));
}

std::unique_ptr<StyleBackend> make_backend(const std::string& backend,
                                           const std::filesystem::path& asset,
                                           bool full_covariance) {
  if (backend == "moment") return make_moment_backend(full_covariance);
  if (backend == "feature") return make_feature_backend(asset);
  throw ConfigError("style: unknown backend '" + backend +
                    "' (expected moment or feature)");
}

Image transfer(const Image& content, const Image& style,
               const StyleBackend& backend) {
  return backend.transfer(content, style);
}

}  // namespace deeprepair
