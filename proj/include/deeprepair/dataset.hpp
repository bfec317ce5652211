#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "deeprepair/image.hpp"

namespace deeprepair {

enum class Split { kTrain, kTest };

// Immutable-after-construction set of labelled images.  Pixels float in
// [0,1], CHW per image, contiguous over the whole set.
struct LabelledDataset {
  ImageShape shape;
  std::vector<float> images;
  std::vector<int> labels;
  int num_classes = 0;
  std::string name;

  std::size_t size() const { return labels.size(); }
  std::size_t image_size() const { return shape.size(); }

  const float* image_data(std::size_t i) const {
    return images.data() + i * image_size();
  }
  float* image_data(std::size_t i) { return images.data() + i * image_size(); }

  Image image(std::size_t i) const;
  void append(const Image& img, int label);
  // Subset in the given index order.
  LabelledDataset subset(const std::vector<std::size_t>& indices,
                         const std::string& subset_name) const;

  // Throws ValidationError on any invariant breach.
  void validate() const;
};

// Loads either standard CIFAR binary batches (data_batch_*.bin /
// test_batch.bin) or a directory of PNG files with a labels.txt index;
// the format is detected from the directory contents.
LabelledDataset load_dataset(const std::filesystem::path& root, Split split);

LabelledDataset load_cifar_binary(const std::filesystem::path& root, Split split);
LabelledDataset load_image_directory(const std::filesystem::path& root, Split split);

// Procedurally generated 10-class 32x32 RGB dataset, written in CIFAR
// binary layout so it is indistinguishable to the loader.  Classes are
// low-frequency color/texture templates with per-instance appearance
// jitter; difficulty is tuned so a small convnet reaches high but not
// perfect accuracy.
struct SyntheticSpec {
  int train_count = 10000;
  int test_count = 2000;
  int num_classes = 10;
  int height = 32;
  int width = 32;
};

void write_synthetic_dataset(const std::filesystem::path& root,
                             const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace deeprepair
