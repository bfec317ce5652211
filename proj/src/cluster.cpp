#include "deeprepair/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "deeprepair/errors.hpp"
#include "deeprepair/kernels.hpp"

namespace deeprepair {

using nlohmann::json;

std::string strategy_name(SamplingStrategy s) {
  return s == SamplingStrategy::kUniform ? "uniform" : "clustering";
}

SamplingStrategy strategy_from_name(const std::string& name) {
  if (name == "uniform") return SamplingStrategy::kUniform;
  if (name == "clustering") return SamplingStrategy::kClustering;
  throw ConfigError("sampler: unknown strategy '" + name + "'");
}

double ClusterModel::member_distance(const LabelledDataset& guidance,
                                     std::size_t i) const {
  const int c = assignments.at(i);
  return std::sqrt(kernels::squared_l2(guidance.image_size(),
                                       guidance.image_data(i),
                                       centers.at(c).data()));
}

namespace {

std::size_t nearest_center(const LabelledDataset& ds, std::size_t i,
                           const std::vector<std::vector<float>>& centers) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_c = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = kernels::squared_l2(ds.image_size(), ds.image_data(i),
                                         centers[c].data());
    if (d < best) {  // strict: ties stay with the lowest cluster id
      best = d;
      best_c = c;
    }
  }
  return best_c;
}

}  // namespace

ClusterModel fit_clusters(const LabelledDataset& guidance, int n_clusters,
                          std::uint64_t seed) {
  const std::size_t n = guidance.size();
  if (n_clusters < 1 || static_cast<std::size_t>(n_clusters) > n)
    throw ConfigError("fit_clusters: N must be in [1, |guidance|], got " +
                      std::to_string(n_clusters) + " for " + std::to_string(n) +
                      " samples");
  const std::size_t dim = guidance.image_size();

  ClusterModel model;
  model.n_clusters = n_clusters;
  model.seed = seed;

  // greedy farthest-point seeding
  Rng rng(seed);
  std::vector<std::size_t> seed_idx;
  seed_idx.push_back(
      static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(n) - 1)));
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  while (seed_idx.size() < static_cast<std::size_t>(n_clusters)) {
    const std::size_t last = seed_idx.back();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = kernels::squared_l2(dim, guidance.image_data(i),
                                           guidance.image_data(last));
      min_d[i] = std::min(min_d[i], d);
    }
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (min_d[i] > far_d) {
        far_d = min_d[i];
        far = i;
      }
    }
    seed_idx.push_back(far);
  }
  for (std::size_t idx : seed_idx) {
    const float* p = guidance.image_data(idx);
    model.centers.emplace_back(p, p + dim);
  }

  model.assignments.assign(n, -1);
  constexpr int kMaxIter = 300;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int a = static_cast<int>(nearest_center(guidance, i, model.centers));
      if (a != model.assignments[i]) {
        model.assignments[i] = a;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    // recompute means
    std::vector<std::vector<double>> sums(
        n_clusters, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(n_clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const float* p = guidance.image_data(i);
      auto& s = sums[model.assignments[i]];
      for (std::size_t d = 0; d < dim; ++d) s[d] += p[d];
      ++counts[model.assignments[i]];
    }
    for (int c = 0; c < n_clusters; ++c) {
      if (counts[c] == 0) {
        // re-seed with the point farthest from its current center
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = kernels::squared_l2(
              dim, guidance.image_data(i),
              model.centers[model.assignments[i]].data());
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        const float* p = guidance.image_data(far);
        std::copy(p, p + dim, model.centers[c].begin());
        model.assignments[far] = c;
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d)
        model.centers[c][d] =
            static_cast<float>(sums[c][d] / static_cast<double>(counts[c]));
    }
  }
  return model;
}

void SamplingDistribution::validate() const {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0))
      throw ValidationError("sampler: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("sampler: probabilities sum to " +
                          std::to_string(total) + ", expected 1");
  if (strategy == SamplingStrategy::kClustering && !cluster_model)
    throw ValidationError("sampler: clustering strategy without a model");
}

SamplingDistribution uniform_distribution(std::size_t n) {
  if (n == 0) throw ConfigError("sampler: empty guidance set");
  SamplingDistribution d;
  d.strategy = SamplingStrategy::kUniform;
  d.probs.assign(n, 1.0 / static_cast<double>(n));
  return d;
}

std::vector<double> raw_cluster_weights(const ClusterModel& model,
                                        const LabelledDataset& guidance) {
  const std::size_t n = guidance.size();
  if (model.assignments.size() != n)
    throw ConfigError("sampler: cluster model was fitted on a different set");
  std::vector<double> dist(n);
  std::vector<double> cluster_total(model.n_clusters, 0.0);
  std::vector<std::size_t> cluster_count(model.n_clusters, 0);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = model.member_distance(guidance, i);
    cluster_total[model.assignments[i]] += dist[i];
    ++cluster_count[model.assignments[i]];
  }
  const double inv_n = 1.0 / static_cast<double>(model.n_clusters);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = model.assignments[i];
    if (cluster_count[c] == 1 || cluster_total[c] <= 0.0) {
      // singleton (or all-coincident) cluster: the member takes the
      // cluster's full mass, the 0/0 limit of the weight formula
      w[i] = inv_n / static_cast<double>(cluster_count[c]);
    } else {
      w[i] = inv_n * (1.0 - dist[i] / cluster_total[c]);
    }
  }
  return w;
}

SamplingDistribution sampling_distribution(const ClusterModel& model,
                                           const LabelledDataset& guidance) {
  std::vector<double> w = raw_cluster_weights(model, guidance);
  double total = 0.0;
  for (double v : w) total += v;
  if (total <= 0.0)
    throw ValidationError("sampler: degenerate weights, nothing to sample");
  SamplingDistribution d;
  d.strategy = SamplingStrategy::kClustering;
  d.cluster_model = model;
  d.probs.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) d.probs[i] = w[i] / total;
  // guard against accumulated rounding drift
  double check = 0.0;
  for (double p : d.probs) check += p;
  d.probs.back() += 1.0 - check;
  if (d.probs.back() < 0.0) d.probs.back() = 0.0;
  return d;
}

std::size_t sample_reference(const SamplingDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    acc += dist.probs[i];
    if (u < acc) return i;
  }
  return dist.probs.size() - 1;
}

void save_sampler(const std::filesystem::path& path, const SamplerArtifact& a) {
  json j;
  j["strategy"] = strategy_name(a.dist.strategy);
  j["probs"] = a.dist.probs;
  j["split_file"] = a.split_file;
  if (a.dist.cluster_model) {
    const ClusterModel& m = *a.dist.cluster_model;
    j["cluster"] = {{"seed", m.seed},
                    {"n_clusters", m.n_clusters},
                    {"assignments", m.assignments},
                    {"centers", m.centers}};
  }
  std::ofstream out(path);
  if (!out) throw LoadError("sampler: cannot write " + path.string());
  out << j.dump(2) << "\n";
}

SamplerArtifact load_sampler(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("sampler: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw LoadError("sampler: malformed JSON in " + path.string() + ": " +
                    e.what());
  }
  SamplerArtifact a;
  a.dist.strategy = strategy_from_name(j.at("strategy").get<std::string>());
  a.dist.probs = j.at("probs").get<std::vector<double>>();
  a.split_file = j.value("split_file", "");
  if (j.contains("cluster")) {
    ClusterModel m;
    m.seed = j["cluster"].at("seed").get<std::uint64_t>();
    m.n_clusters = j["cluster"].at("n_clusters").get<int>();
    m.assignments = j["cluster"].at("assignments").get<std::vector<int>>();
    m.centers =
        j["cluster"].at("centers").get<std::vector<std::vector<float>>>();
    a.dist.cluster_model = std::move(m);
  }
  a.dist.validate();
  return a;
}

}  // namespace deeprepair
