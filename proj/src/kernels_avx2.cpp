// AVX2/FMA kernel variants.  Built only on x86-64; selected at runtime
// when the CPU reports AVX2+FMA support.

#include "deeprepair/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>

namespace deeprepair::kernels {
namespace {

void gemm_f32_avx2(std::size_t m, std::size_t k, std::size_t n,
                   const float* a, const float* b, float beta, float* c) {
  const std::size_t n8 = n & ~std::size_t(7);
  for (std::size_t i = 0; i < m; ++i) {
    float* ci = c + i * n;
    if (beta == 0.0f) {
      std::fill(ci, ci + n, 0.0f);
    } else if (beta != 1.0f) {
      for (std::size_t j = 0; j < n; ++j) ci[j] *= beta;
    }
    const float* ai = a + i * k;
    std::size_t p = 0;
    // two rows of B per pass keeps the FMA ports busier
    for (; p + 2 <= k; p += 2) {
      const __m256 a0 = _mm256_set1_ps(ai[p]);
      const __m256 a1 = _mm256_set1_ps(ai[p + 1]);
      const float* b0 = b + p * n;
      const float* b1 = b0 + n;
      std::size_t j = 0;
      for (; j < n8; j += 8) {
        __m256 acc = _mm256_loadu_ps(ci + j);
        acc = _mm256_fmadd_ps(a0, _mm256_loadu_ps(b0 + j), acc);
        acc = _mm256_fmadd_ps(a1, _mm256_loadu_ps(b1 + j), acc);
        _mm256_storeu_ps(ci + j, acc);
      }
      for (; j < n; ++j) ci[j] += ai[p] * b0[j] + ai[p + 1] * b1[j];
    }
    for (; p < k; ++p) {
      const __m256 a0 = _mm256_set1_ps(ai[p]);
      const float* b0 = b + p * n;
      std::size_t j = 0;
      for (; j < n8; j += 8) {
        __m256 acc = _mm256_loadu_ps(ci + j);
        acc = _mm256_fmadd_ps(a0, _mm256_loadu_ps(b0 + j), acc);
        _mm256_storeu_ps(ci + j, acc);
      }
      for (; j < n; ++j) ci[j] += ai[p] * b0[j];
    }
  }
}

void gemm_f64_avx2(std::size_t m, std::size_t k, std::size_t n,
                   const double* a, const double* b, double beta, double* c) {
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    if (beta == 0.0) {
      std::fill(ci, ci + n, 0.0);
    } else if (beta != 1.0) {
      for (std::size_t j = 0; j < n; ++j) ci[j] *= beta;
    }
    const double* ai = a + i * k;
    std::size_t p = 0;
    for (; p + 2 <= k; p += 2) {
      const __m256d a0 = _mm256_set1_pd(ai[p]);
      const __m256d a1 = _mm256_set1_pd(ai[p + 1]);
      const double* b0 = b + p * n;
      const double* b1 = b0 + n;
      std::size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d acc = _mm256_loadu_pd(ci + j);
        acc = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b0 + j), acc);
        acc = _mm256_fmadd_pd(a1, _mm256_loadu_pd(b1 + j), acc);
        _mm256_storeu_pd(ci + j, acc);
      }
      for (; j < n; ++j) ci[j] += ai[p] * b0[j] + ai[p + 1] * b1[j];
    }
    for (; p < k; ++p) {
      const __m256d a0 = _mm256_set1_pd(ai[p]);
      const double* b0 = b + p * n;
      std::size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d acc = _mm256_loadu_pd(ci + j);
        acc = _mm256_fmadd_pd(a0, _mm256_loadu_pd(b0 + j), acc);
        _mm256_storeu_pd(ci + j, acc);
      }
      for (; j < n; ++j) ci[j] += ai[p] * b0[j];
    }
  }
}

void axpy_f32_avx2(std::size_t n, float alpha, const float* x, float* y) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_f64_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void blend_f32_avx2(std::size_t n, float a, const float* x,
                    float b, const float* y, float* z) {
  const __m256 va = _mm256_set1_ps(a);
  const __m256 vb = _mm256_set1_ps(b);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 t = _mm256_mul_ps(vb, _mm256_loadu_ps(y + i));
    _mm256_storeu_ps(z + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), t));
  }
  for (; i < n; ++i) z[i] = a * x[i] + b * y[i];
}

void relu_f32_avx2(std::size_t n, const float* x, float* y) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_f64_avx2(std::size_t n, const double* x, double* y) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_f32_avx2(std::size_t n, const float* y, const float* dy,
                        float* dx) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(y + i), zero, _CMP_GT_OQ);
    const __m256 g = _mm256_and_ps(mask, _mm256_loadu_ps(dy + i));
    _mm256_storeu_ps(dx + i, _mm256_add_ps(_mm256_loadu_ps(dx + i), g));
  }
  for (; i < n; ++i)
    if (y[i] > 0.0f) dx[i] += dy[i];
}

void relu_grad_f64_avx2(std::size_t n, const double* y, const double* dy,
                        double* dx) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask =
        _mm256_cmp_pd(_mm256_loadu_pd(y + i), zero, _CMP_GT_OQ);
    const __m256d g = _mm256_and_pd(mask, _mm256_loadu_pd(dy + i));
    _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), g));
  }
  for (; i < n; ++i)
    if (y[i] > 0.0) dx[i] += dy[i];
}

void clamp01_f32_avx2(std::size_t n, float* x) {
  const __m256 zero = _mm256_setzero_ps();
  const __m256 one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(
        x + i, _mm256_min_ps(_mm256_max_ps(_mm256_loadu_ps(x + i), zero), one));
  }
  for (; i < n; ++i) x[i] = std::clamp(x[i], 0.0f, 1.0f);
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum_f32_avx2(std::size_t n, const float* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm_loadu_ps(x + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += static_cast<double>(x[i]);
  return s;
}

double sum_f64_avx2(std::size_t n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double sumsq_f32_avx2(std::size_t n, const float* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i)
    s += static_cast<double>(x[i]) * static_cast<double>(x[i]);
  return s;
}

double squared_l2_f32_avx2(std::size_t n, const float* x, const float* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(x + i)),
                                    _mm256_cvtps_pd(_mm_loadu_ps(y + i)));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    s += d * d;
  }
  return s;
}

}  // namespace

const KernelTable* avx2_table() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
    return nullptr;
  static const KernelTable t = {
      gemm_f32_avx2,      gemm_f64_avx2,
      axpy_f32_avx2,      axpy_f64_avx2,
      blend_f32_avx2,
      relu_f32_avx2,      relu_f64_avx2,
      relu_grad_f32_avx2, relu_grad_f64_avx2,
      clamp01_f32_avx2,
      sum_f32_avx2,       sum_f64_avx2,
      sumsq_f32_avx2,
      squared_l2_f32_avx2,
  };
  return &t;
}

}  // namespace deeprepair::kernels

#else

namespace deeprepair::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace deeprepair::kernels

#endif
