#include "deeprepair/harness.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "deeprepair/errors.hpp"
#include "deeprepair/rng.hpp"

namespace deeprepair {

nn::Tensor<float> batch_tensor(const LabelledDataset& data,
                               const std::vector<std::size_t>& indices) {
  const std::size_t pixels = data.shape.size();
  nn::Tensor<float> x({indices.size(), std::size_t(data.shape.channels),
                       std::size_t(data.shape.height),
                       std::size_t(data.shape.width)});
  for (std::size_t i = 0; i < indices.size(); ++i)
    std::copy_n(data.images.data() + indices[i] * pixels, pixels,
                x.data.data() + i * pixels);
  return x;
}

std::vector<int> predict(const nn::Network<float>& net,
                         const LabelledDataset& data,
                         std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("predict: zero batch size");
  const std::size_t n = data.size();
  const std::size_t k = std::size_t(data.num_classes);
  std::vector<int> preds(n);
  nn::Workspace<float> ws;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    idx.resize(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    const nn::Tensor<float> x = batch_tensor(data, idx);
    net.forward(x, ws, /*training=*/false);
    const nn::Tensor<float>& logits = net.output(ws);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const float* z = logits.data.data() + i * k;
      preds[start + i] =
          int(std::max_element(z, z + k) - z);
    }
  }
  return preds;
}

EvalResult evaluate(const nn::Network<float>& net, const LabelledDataset& data,
                    std::size_t batch_size) {
  const std::vector<int> preds = predict(net, data, batch_size);
  EvalResult res;
  res.total = data.size();
  res.correct_mask.resize(res.total);
  for (std::size_t i = 0; i < res.total; ++i) {
    res.correct_mask[i] = preds[i] == data.labels[i] ? 1 : 0;
    res.correct += res.correct_mask[i];
  }
  res.accuracy = res.total ? double(res.correct) / double(res.total) : 0.0;
  return res;
}

double accuracy_on_indices(const nn::Network<float>& net,
                           const LabelledDataset& data,
                           const std::vector<std::size_t>& indices,
                           std::size_t batch_size) {
  if (indices.empty()) throw ValidationError("accuracy: empty index set");
  const std::size_t k = std::size_t(data.num_classes);
  std::size_t correct = 0;
  nn::Workspace<float> ws;
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const std::size_t stop = std::min(indices.size(), start + batch_size);
    const std::vector<std::size_t> idx(indices.begin() + long(start),
                                       indices.begin() + long(stop));
    const nn::Tensor<float> x = batch_tensor(data, idx);
    net.forward(x, ws, /*training=*/false);
    const nn::Tensor<float>& logits = net.output(ws);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const float* z = logits.data.data() + i * k;
      if (int(std::max_element(z, z + k) - z) == data.labels[idx[i]])
        ++correct;
    }
  }
  return double(correct) / double(indices.size());
}

FailureSplit collect_failures(const nn::Network<float>& net,
                              const LabelledDataset& corrupted,
                              CorruptionKind kind, std::size_t guidance_count,
                              std::uint64_t seed,
                              const std::string& model_id) {
  const EvalResult res = evaluate(net, corrupted);
  std::vector<std::size_t> failures;
  for (std::size_t i = 0; i < res.total; ++i)
    if (!res.correct_mask[i]) failures.push_back(i);
  if (failures.empty())
    throw EmptyFailureError("no failures on " + corrupted.name);

  Rng rng = Rng(seed).stream(0xfa11u, std::uint64_t(kind));
  const std::vector<std::size_t> order = rng.permutation(failures.size());
  const std::size_t take = std::min(guidance_count, failures.size());

  FailureSplit split;
  split.model_id = model_id;
  split.kind = kind;
  split.seed = seed;
  split.failure_count = failures.size();
  for (std::size_t i = 0; i < failures.size(); ++i) {
    (i < take ? split.guidance_indices : split.heldout_indices)
        .push_back(failures[order[i]]);
  }
  std::sort(split.guidance_indices.begin(), split.guidance_indices.end());
  std::sort(split.heldout_indices.begin(), split.heldout_indices.end());
  return split;
}

void save_failure_split(const std::filesystem::path& path,
                        const FailureSplit& split) {
  nlohmann::json j = {{"model_id", split.model_id},
                      {"kind", kind_code(split.kind)},
                      {"seed", split.seed},
                      {"failure_count", split.failure_count},
                      {"guidance_indices", split.guidance_indices},
                      {"heldout_indices", split.heldout_indices}};
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write failure split: " + path.string());
  out << j.dump(2) << "\n";
}

FailureSplit load_failure_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open failure split: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("bad failure split: " + std::string(e.what()));
  }
  FailureSplit split;
  split.model_id = j.at("model_id").get<std::string>();
  split.kind = kind_from_code(j.at("kind").get<std::string>());
  split.seed = j.at("seed").get<std::uint64_t>();
  split.failure_count = j.at("failure_count").get<std::size_t>();
  split.guidance_indices =
      j.at("guidance_indices").get<std::vector<std::size_t>>();
  split.heldout_indices =
      j.at("heldout_indices").get<std::vector<std::size_t>>();
  return split;
}

}  // namespace deeprepair
