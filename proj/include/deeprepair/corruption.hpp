#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deeprepair/dataset.hpp"
#include "deeprepair/image.hpp"
#include "deeprepair/rng.hpp"

namespace deeprepair {

// The 15 failure patterns: three noise kinds, four blur kinds, five
// weather/photometric kinds, and three digital kinds.
enum class CorruptionKind {
  kGaussianNoise,    // GN
  kShotNoise,        // SN
  kImpulseNoise,     // IN
  kDefocusBlur,      // DB
  kGlassBlur,        // GB
  kMotionBlur,       // MB
  kZoomBlur,         // ZM
  kSnow,             // SW
  kFrost,            // FT
  kFog,              // FG
  kBrightness,       // BS
  kContrast,         // CT
  kElasticTransform, // ET
  kPixelate,         // PIX
  kJpeg,             // JPEG
};

inline constexpr int kNumCorruptionKinds = 15;
inline constexpr int kNumSeverities = 5;

std::string kind_code(CorruptionKind kind);                 // "GN", ...
CorruptionKind kind_from_code(const std::string& code);     // throws ConfigError
std::vector<CorruptionKind> all_corruption_kinds();

// True for the 9 kinds with a native synthesizer (GN, SN, IN, BS, CT,
// PIX, JPEG, DB, MB); the remaining 6 are ingestion-only.
bool is_synthesized(CorruptionKind kind);

enum class CorruptionSource { kSynthesized, kIngested };

struct CorruptionSpec {
  CorruptionKind kind;
  int severity = 1;  // 1..5
  // Kind-specific override; empty selects the severity table entry.
  std::vector<double> params;
  CorruptionSource source = CorruptionSource::kSynthesized;

  void validate() const;  // throws ConfigError
};

// Severity parameter table entry for a synthesized kind (values are
// documented in corruption.cpp, the single source of truth).
std::vector<double> severity_params(CorruptionKind kind, int severity);

// Applies one corruption to one image.  Output has the input's shape,
// clamped to [0,1].  Deterministic given (image, spec, rng state).
// Throws UnsupportedKindError for ingestion-only kinds.
Image apply_corruption(const Image& input, const CorruptionSpec& spec, Rng& rng);

// Reads a precomputed (5*N, H, W, C) uint8 NPY for `kind` and pairs it
// with the clean test labels (severity-major, labels repeated per
// severity block).
LabelledDataset ingest_corrupted(const std::filesystem::path& path,
                                 CorruptionKind kind,
                                 const std::vector<int>& severities,
                                 const LabelledDataset& clean_test);

// Builds D^{v_k}: all five severities stacked severity-major, labels
// copied from the clean test set per block.  `ingest_dir`, when given,
// supplies <code>.npy files for ingestion-only kinds.
LabelledDataset build_corrupted_testset(
    const LabelledDataset& clean_test, CorruptionKind kind, std::uint64_t seed,
    const std::optional<std::filesystem::path>& ingest_dir = std::nullopt);

}  // namespace deeprepair
