#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace deeprepair::nn {

// Dense row-major tensor.  Rank is dynamic; training code uses
// (B, C, H, W) activations and (B, K) logits.
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(count(shape), T(0));
  }

  static std::size_t count(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t(1),
                           std::multiplies<>());
  }

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  void reshape(std::vector<std::size_t> s) {
    if (count(s) != data.size())
      throw std::invalid_argument("tensor: reshape changes element count");
    shape = std::move(s);
  }

  void zero() { std::fill(data.begin(), data.end(), T(0)); }
};

}  // namespace deeprepair::nn
