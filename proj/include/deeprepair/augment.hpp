// Augmentation operation set: the 9 base image operations, the
// style-transfer operations built from guidance failures, the StyleAug
// chain mixer, and the Cutout/Mixup/CutMix baselines.

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "deeprepair/cluster.hpp"
#include "deeprepair/image.hpp"
#include "deeprepair/rng.hpp"
#include "deeprepair/style_transfer.hpp"

namespace deeprepair {

enum class OpKind { kBase, kStyle };

struct AugOperation {
  std::string name;
  OpKind kind = OpKind::kBase;
  // Draws its own magnitude (and, for style ops, reference) from rng.
  std::function<Image(const Image&, Rng&)> apply;
};

struct OperationSet {
  std::vector<AugOperation> base;
  std::vector<AugOperation> style;  // possibly empty

  void validate() const;  // base names must be exactly the canonical 9
};

// The canonical base set with documented magnitude ranges.
OperationSet make_base_operations();

// Style operation: applies ST(X, X^ref).  By default the reference is
// re-sampled from `sampling` on every invocation; with `fixed_reference`
// >= 0 it is pinned to the member of that cluster nearest its center.
AugOperation make_style_op(const SamplingDistribution& sampling,
                           std::shared_ptr<const LabelledDataset> guidance,
                           std::shared_ptr<const StyleBackend> backend,
                           int fixed_reference = -1);

// Extends `ops` with N style operations (resampling, or one fixed
// reference per cluster when fixed_references is set).
void add_style_ops(OperationSet& ops, const SamplingDistribution& sampling,
                   std::shared_ptr<const LabelledDataset> guidance,
                   std::shared_ptr<const StyleBackend> backend,
                   int n_ops, bool fixed_references);

struct ChainTrace {
  std::vector<std::string> op_names;  // in application order, 1..3 ops
  std::vector<OpKind> op_kinds;
  double weight = 0.0;
};

struct StyleAugTrace {
  std::vector<double> mix_weights;  // Dirichlet draw, one per chain
  double blend_weight = 0.0;        // Beta draw
  std::vector<ChainTrace> chains;
};

// The chain mixer: M operation chains (first op from the full set,
// later ops from the base set only, depth uniform in {1,2,3}) combined
// with Dirichlet weights, then blended with the input by a Beta draw.
Image style_aug(const Image& x, const OperationSet& ops, Rng& rng, int m_width,
                double alpha, StyleAugTrace* trace = nullptr);

// --- base operation primitives (magnitude-explicit, for direct use) ---
Image autocontrast(const Image& img);
Image equalize(const Image& img);
Image posterize(const Image& img, int bits);           // bits in [1,8]
Image rotate(const Image& img, double degrees);        // |deg| <= 180
Image solarize(const Image& img, double threshold);    // in [0,1]
Image shear_x(const Image& img, double factor);        // |f| <= 1
Image shear_y(const Image& img, double factor);
Image translate_x(const Image& img, double pixels);    // |px| <= width
Image translate_y(const Image& img, double pixels);

// --- baseline augmenters ---
Image cutout(const Image& img, int patch_size, Rng& rng);

struct MixedBatch {
  std::vector<Image> images;
  std::vector<std::vector<double>> soft_labels;  // rows sum to 1
};

MixedBatch mixup(const std::vector<Image>& batch, const std::vector<int>& labels,
                 int num_classes, double alpha, Rng& rng);
MixedBatch cutmix(const std::vector<Image>& batch,
                  const std::vector<int>& labels, int num_classes, double alpha,
                  Rng& rng);

struct CutBox {
  int y0 = 0, x0 = 0, h = 0, w = 0;
};

// Pastes `patch_src`'s box into `base`; returns the fraction of area
// taken from patch_src (the second label weight).
double cutmix_paste(Image& base, const Image& patch_src, const CutBox& box);

}  // namespace deeprepair
