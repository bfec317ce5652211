// The ST(content, style) operator: map a content image toward the
// global appearance of a style reference.  Pluggable backends behind one
// interface; the default is dependency-free per-channel moment matching.

#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "deeprepair/image.hpp"

namespace deeprepair {

class StyleBackend {
 public:
  virtual ~StyleBackend() = default;
  virtual std::string name() const = 0;
  virtual bool deterministic() const { return true; }
  // Output has the content's shape, clamped to [0,1].  Content and
  // style must share channel count; spatial sizes may differ.
  virtual Image transfer(const Image& content, const Image& style) const = 0;
};

// Per-channel affine map (p - mu_c)/sigma_c * sigma_s + mu_s, clamped.
// A zero-variance content channel maps to the constant style mean.
// With `full_covariance`, matches the cross-channel covariance instead
// via symmetric square-root whitening/coloring.
std::unique_ptr<StyleBackend> make_moment_backend(bool full_covariance = false);

// Wavelet-domain statistics matching: per-subband moments of the
// decomposed content are aligned to the style's, then synthesized back.
// The analysis/synthesis filter pair comes from an asset file; a missing
// asset raises BackendUnavailableError so callers can fall back to the
// moment backend.
std::unique_ptr<StyleBackend> make_feature_backend(
    const std::filesystem::path& asset_path);

// Writes the default (Haar) feature-backend asset.
void write_default_feature_asset(const std::filesystem::path& path);

// Factory from config: backend is "moment" or "feature".
std::unique_ptr<StyleBackend> make_backend(
    const std::string& backend, const std::filesystem::path& asset_path = {},
    bool full_covariance = false);

Image transfer(const Image& content, const Image& style,
               const StyleBackend& backend);

}  // namespace deeprepair
