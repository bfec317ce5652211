// Result aggregation: accuracy rows, the cross-robustness matrix
// (repaired-on x evaluated-on), ablation comparison with config-drift
// checks, CSV emission, and the report figures.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "deeprepair/dataset.hpp"
#include "deeprepair/nn/network.hpp"

namespace deeprepair {

struct ResultRow {
  std::string model;
  std::string method;
  std::string repaired_on;  // corruption code, or "-" for the base model
  std::string eval_on;      // "clean" or a corruption code
  std::string split;        // clean | corrupted | guidance | heldout
  double accuracy = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;  // 16 hex chars
};

std::uint64_t fnv1a(const std::string& s);
// FNV-1a of a canonical config string, as fixed-width hex.
std::string config_hash_hex(const std::string& canonical);

struct NamedModel {
  std::string name;
  const nn::Network<float>* net = nullptr;
};

struct NamedDataset {
  std::string name;
  const LabelledDataset* data = nullptr;
};

struct CrossRobustness {
  std::vector<std::string> repaired_on;  // row names
  std::vector<std::string> eval_on;      // column names
  std::vector<double> accuracy;          // row-major fractions

  double at(std::size_t row, std::size_t col) const {
    return accuracy[row * eval_on.size() + col];
  }
};

// Evaluates every model on every test set.
CrossRobustness cross_robustness(const std::vector<NamedModel>& models,
                                 const std::vector<NamedDataset>& testsets);

struct AblationResult {
  std::string reference;
  std::vector<std::string> methods;          // reference excluded
  std::vector<double> accuracy;              // mean over seeds, per method
  std::vector<double> delta_vs_reference;
};

// Compares methods on one (eval_on, split) slice.  Rows of the same
// method must agree on config_hash; a drifted config (same method,
// different hash) throws ValidationError, as does a missing reference.
AblationResult ablation_compare(const std::vector<ResultRow>& rows,
                                const std::string& reference_method,
                                const std::string& eval_on,
                                const std::string& split);

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

void write_cross_matrix_csv(const std::filesystem::path& path,
                            const CrossRobustness& cross);

// Writes results.csv, cross_matrix.csv (when given), and PNG figures
// under <out_dir>/plots.
void emit_report(const std::filesystem::path& out_dir,
                 const std::vector<ResultRow>& rows,
                 const CrossRobustness* cross = nullptr);

}  // namespace deeprepair
