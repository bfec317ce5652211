// Classification losses: softmax, cross-entropy (hard and soft
// labels), and the Jensen-Shannon consistency term across three
// predictive distributions, with gradients taken with respect to the
// logits of every branch.

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "deeprepair/errors.hpp"
#include "deeprepair/nn/tensor.hpp"

namespace deeprepair::nn {

inline constexpr double kProbFloor = 1e-12;

// Row-wise numerically stable softmax; probs gets logits' shape.
template <typename T>
void softmax(const Tensor<T>& logits, Tensor<T>& probs) {
  const std::size_t b = logits.dim(0), k = logits.dim(1);
  probs = Tensor<T>(logits.shape);
  for (std::size_t s = 0; s < b; ++s) {
    const T* z = logits.data.data() + s * k;
    T* p = probs.data.data() + s * k;
    double mx = double(z[0]);
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, double(z[j]));
    double denom = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double e = std::exp(double(z[j]) - mx);
      p[j] = T(e);
      denom += e;
    }
    for (std::size_t j = 0; j < k; ++j) p[j] = T(double(p[j]) / denom);
  }
}

// Mean cross-entropy over the batch given hard labels; if dlogits is
// non-null it receives d(loss)/d(logits) = (p - onehot)/B.
template <typename T>
double cross_entropy(const Tensor<T>& probs, const std::vector<int>& labels,
                     Tensor<T>* dlogits = nullptr) {
  const std::size_t b = probs.dim(0), k = probs.dim(1);
  if (labels.size() != b)
    throw ValidationError("cross_entropy: label count mismatch");
  if (dlogits) *dlogits = Tensor<T>(probs.shape);
  double loss = 0.0;
  for (std::size_t s = 0; s < b; ++s) {
    const T* p = probs.data.data() + s * k;
    const int y = labels[s];
    if (y < 0 || std::size_t(y) >= k)
      throw ValidationError("cross_entropy: label out of range");
    loss -= std::log(std::max(double(p[y]), kProbFloor));
    if (dlogits) {
      T* d = dlogits->data.data() + s * k;
      for (std::size_t j = 0; j < k; ++j)
        d[j] = T((double(p[j]) - (int(j) == y ? 1.0 : 0.0)) / double(b));
    }
  }
  return loss / double(b);
}

// Soft-label variant (mixup/cutmix): rows of `targets` sum to 1.
template <typename T>
double cross_entropy_soft(const Tensor<T>& probs,
                          const std::vector<std::vector<double>>& targets,
                          Tensor<T>* dlogits = nullptr) {
  const std::size_t b = probs.dim(0), k = probs.dim(1);
  if (targets.size() != b)
    throw ValidationError("cross_entropy: target count mismatch");
  if (dlogits) *dlogits = Tensor<T>(probs.shape);
  double loss = 0.0;
  for (std::size_t s = 0; s < b; ++s) {
    const T* p = probs.data.data() + s * k;
    if (targets[s].size() != k)
      throw ValidationError("cross_entropy: target width mismatch");
    for (std::size_t j = 0; j < k; ++j)
      loss -= targets[s][j] * std::log(std::max(double(p[j]), kProbFloor));
    if (dlogits) {
      T* d = dlogits->data.data() + s * k;
      for (std::size_t j = 0; j < k; ++j)
        d[j] = T((double(p[j]) - targets[s][j]) / double(b));
    }
  }
  return loss / double(b);
}

// Jensen-Shannon divergence of three distributions:
//   JS = (KL(p||m) + KL(p1||m) + KL(p2||m)) / 3, m = (p + p1 + p2) / 3.
// Bounded by [0, ln 3].
double js_divergence(const std::vector<double>& p,
                     const std::vector<double>& p1,
                     const std::vector<double>& p2);

// Batch form: mean JS over rows of three probability tensors.  When
// dlogits[r] is non-null it receives the gradient with respect to the
// logits of branch r (softmax Jacobian applied to (1/3) log(p_r / m)).
template <typename T>
double js_loss(const Tensor<T>& p0, const Tensor<T>& p1, const Tensor<T>& p2,
               Tensor<T>* dlogits0 = nullptr, Tensor<T>* dlogits1 = nullptr,
               Tensor<T>* dlogits2 = nullptr) {
  if (p0.shape != p1.shape || p0.shape != p2.shape)
    throw ValidationError("js_loss: shape mismatch");
  const std::size_t b = p0.dim(0), k = p0.dim(1);
  const Tensor<T>* branches[3] = {&p0, &p1, &p2};
  Tensor<T>* grads[3] = {dlogits0, dlogits1, dlogits2};
  for (auto* g : grads)
    if (g) *g = Tensor<T>(p0.shape);
  double loss = 0.0;
  std::vector<double> m(k), glogp(k);
  for (std::size_t s = 0; s < b; ++s) {
    for (std::size_t j = 0; j < k; ++j)
      m[j] = (double(p0.data[s * k + j]) + double(p1.data[s * k + j]) +
              double(p2.data[s * k + j])) /
             3.0;
    for (int r = 0; r < 3; ++r) {
      const T* p = branches[r]->data.data() + s * k;
      double dot = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double pj = std::max(double(p[j]), kProbFloor);
        const double lr = std::log(pj / std::max(m[j], kProbFloor));
        loss += pj * lr / 3.0;
        glogp[j] = lr / 3.0;
        dot += double(p[j]) * glogp[j];
      }
      if (grads[r]) {
        T* d = grads[r]->data.data() + s * k;
        for (std::size_t j = 0; j < k; ++j)
          d[j] = T(double(p[j]) * (glogp[j] - dot) / double(b));
      }
    }
  }
  return loss / double(b);
}

}  // namespace deeprepair::nn
