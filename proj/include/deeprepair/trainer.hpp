// Training loops: supervised base training, consistency-regularized
// repair (cross-entropy on the clean view plus a weighted
// Jensen-Shannon term across two augmented views), and the baseline
// fine-tuning methods used for comparison.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deeprepair/augment.hpp"
#include "deeprepair/dataset.hpp"
#include "deeprepair/nn/network.hpp"

namespace deeprepair {

struct TrainConfig {
  std::size_t batch_size = 128;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int max_epochs = 500;
  int patience = 10;       // epochs without val improvement before stopping
  double lambda = 12.0;    // consistency weight
  double alpha = 1.0;      // Dirichlet / Beta parameter for the mixer
  int m_width = 3;         // mixing chains
  double val_fraction = 0.1;
  double baseline_alpha = 1.0;  // mixup/cutmix Beta parameter
  int cutout_size = 8;
  std::uint64_t seed = 0;
};

struct EpochLog {
  int epoch = 0;
  double total_loss = 0.0;
  double ce_loss = 0.0;
  double js_loss = 0.0;  // zero for methods without the consistency term
  double val_accuracy = 0.0;
};

struct TrainingLog {
  std::vector<EpochLog> epochs;
  int best_epoch = -1;
  double best_val_accuracy = 0.0;
  bool early_stopped = false;
};

// Deterministic train/val index split.
void split_train_val(std::size_t n, double val_fraction, std::uint64_t seed,
                     std::vector<std::size_t>& train_idx,
                     std::vector<std::size_t>& val_idx);

// Plain supervised training with early stopping on validation accuracy;
// the network is left at the best-validation parameters.
TrainingLog train_base(nn::Network<float>& net, const LabelledDataset& train,
                       const LabelledDataset& val, const TrainConfig& cfg);

// Repair fine-tuning: per batch, three forward passes (clean + two
// independently mixed views) with loss CE + lambda * JS.  Validation is
// an internal split of `data`; the network keeps the best-val weights.
TrainingLog repair(nn::Network<float>& net, const LabelledDataset& data,
                   const OperationSet& ops, const TrainConfig& cfg);

enum class RepairMethod {
  kStyleRepair,  // the consistency method with style operations
  kPlain,
  kBaseMix,  // the consistency mixer restricted to the base operations
  kCutout,
  kMixup,
  kCutmix,
};

std::string method_name(RepairMethod m);
RepairMethod method_from_name(const std::string& name);

// Fine-tunes with one of the non-style baselines (plain CE, base-ops
// mixing, cutout, mixup, cutmix) on `data`.
TrainingLog finetune_baseline(nn::Network<float>& net,
                              const LabelledDataset& data, RepairMethod method,
                              const TrainConfig& cfg);

}  // namespace deeprepair
