// K-means over the guidance failures and the sampling distribution that
// favors failures close to their cluster center, plus the uniform
// strategy used as an ablation arm.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deeprepair/dataset.hpp"
#include "deeprepair/rng.hpp"

namespace deeprepair {

enum class SamplingStrategy { kUniform, kClustering };

std::string strategy_name(SamplingStrategy s);
SamplingStrategy strategy_from_name(const std::string& name);

struct ClusterModel {
  int n_clusters = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<float>> centers;  // n_clusters x feature dim
  std::vector<int> assignments;             // one per guidance sample

  // L2 distance from guidance sample `i` to its assigned center.
  double member_distance(const LabelledDataset& guidance, std::size_t i) const;
};

// K-means in raw flattened pixel space.  Greedy farthest-point seeding
// from a seeded start, Lloyd updates capped at 300 iterations,
// assignment ties broken toward the lowest cluster id, empty clusters
// re-seeded with the point farthest from its current center.
ClusterModel fit_clusters(const LabelledDataset& guidance, int n_clusters,
                          std::uint64_t seed);

struct SamplingDistribution {
  std::vector<double> probs;  // one per guidance sample, sums to 1
  SamplingStrategy strategy = SamplingStrategy::kUniform;
  std::optional<ClusterModel> cluster_model;

  void validate() const;  // throws ValidationError
};

SamplingDistribution uniform_distribution(std::size_t n);

// Per-sample weights (1/N) * (1 - d_ij / sum_k d_ik) with the singleton
// convention (lone member takes its cluster's full 1/N mass), before
// any normalization.  Exposed for the hand-computable oracle cases.
std::vector<double> raw_cluster_weights(const ClusterModel& model,
                                        const LabelledDataset& guidance);

// Raw weights, globally normalized to a proper distribution.
SamplingDistribution sampling_distribution(const ClusterModel& model,
                                           const LabelledDataset& guidance);

// Draws a guidance index with probability probs[index].
std::size_t sample_reference(const SamplingDistribution& dist, Rng& rng);

struct SamplerArtifact {
  SamplingDistribution dist;
  std::string split_file;  // provenance
};

void save_sampler(const std::filesystem::path& path, const SamplerArtifact& a);
SamplerArtifact load_sampler(const std::filesystem::path& path);

}  // namespace deeprepair
