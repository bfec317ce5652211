// Scalar reference kernels.  These define the semantics every SIMD
// variant must reproduce.

#include "deeprepair/kernels.hpp"

#include <algorithm>

namespace deeprepair::kernels {
namespace {

template <typename T>
void gemm_ref(std::size_t m, std::size_t k, std::size_t n,
              const T* a, const T* b, T beta, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    T* ci = c + i * n;
    if (beta == T(0)) {
      std::fill(ci, ci + n, T(0));
    } else if (beta != T(1)) {
      for (std::size_t j = 0; j < n; ++j) ci[j] *= beta;
    }
    const T* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = ai[p];
      if (aip == T(0)) continue;
      const T* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

template <typename T>
void axpy_ref(std::size_t n, T alpha, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void blend_ref(std::size_t n, float a, const float* x,
               float b, const float* y, float* z) {
  for (std::size_t i = 0; i < n; ++i) z[i] = a * x[i] + b * y[i];
}

template <typename T>
void relu_ref(std::size_t n, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_grad_ref(std::size_t n, const T* y, const T* dy, T* dx) {
  for (std::size_t i = 0; i < n; ++i)
    if (y[i] > T(0)) dx[i] += dy[i];
}

void clamp01_ref(std::size_t n, float* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], 0.0f, 1.0f);
}

template <typename T>
double sum_ref(std::size_t n, const T* x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(x[i]);
  return acc;
}

double sumsq_ref(std::size_t n, const float* x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += static_cast<double>(x[i]) * static_cast<double>(x[i]);
  return acc;
}

double squared_l2_ref(std::size_t n, const float* x, const float* y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    acc += d * d;
  }
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t = {
      gemm_ref<float>,      gemm_ref<double>,
      axpy_ref<float>,      axpy_ref<double>,
      blend_ref,
      relu_ref<float>,      relu_ref<double>,
      relu_grad_ref<float>, relu_grad_ref<double>,
      clamp01_ref,
      sum_ref<float>,       sum_ref<double>,
      sumsq_ref,
      squared_l2_ref,
  };
  return t;
}

}  // namespace deeprepair::kernels
