// Failure harness: run a model over a (corrupted) test set, keep the
// misclassified indices, and split them into a guidance pool and a
// held-out pool for measuring repair.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "deeprepair/corruption.hpp"
#include "deeprepair/dataset.hpp"
#include "deeprepair/nn/network.hpp"

namespace deeprepair {

struct EvalResult {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;
  std::vector<std::uint8_t> correct_mask;  // 1 per sample
};

// Batched argmax predictions (eval mode).
std::vector<int> predict(const nn::Network<float>& net,
                         const LabelledDataset& data,
                         std::size_t batch_size = 128);

EvalResult evaluate(const nn::Network<float>& net, const LabelledDataset& data,
                    std::size_t batch_size = 128);

// Accuracy restricted to a subset of indices.
double accuracy_on_indices(const nn::Network<float>& net,
                           const LabelledDataset& data,
                           const std::vector<std::size_t>& indices,
                           std::size_t batch_size = 128);

struct FailureSplit {
  std::string model_id;
  CorruptionKind kind = CorruptionKind::kGaussianNoise;
  std::uint64_t seed = 0;
  std::size_t failure_count = 0;  // all misclassified samples
  std::vector<std::size_t> guidance_indices;
  std::vector<std::size_t> heldout_indices;
};

// Finds every failure of `net` on `corrupted`, then draws
// min(guidance_count, failures) of them uniformly without replacement
// (seeded) as guidance; the remainder is held out.  Throws
// EmptyFailureError when the model makes no mistakes at all.
FailureSplit collect_failures(const nn::Network<float>& net,
                              const LabelledDataset& corrupted,
                              CorruptionKind kind, std::size_t guidance_count,
                              std::uint64_t seed, const std::string& model_id);

void save_failure_split(const std::filesystem::path& path,
                        const FailureSplit& split);
FailureSplit load_failure_split(const std::filesystem::path& path);

// Copies a batch of dataset images into a (B, C, H, W) tensor.
nn::Tensor<float> batch_tensor(const LabelledDataset& data,
                               const std::vector<std::size_t>& indices);

}  // namespace deeprepair
