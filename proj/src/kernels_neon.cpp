// NEON kernel variants for aarch64.  Mirrors the scalar reference; the
// f64 entries reuse the reference since 2-lane f64 NEON buys little for
// these shapes.

#include "deeprepair/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <algorithm>

namespace deeprepair::kernels {
namespace {

void gemm_f32_neon(std::size_t m, std::size_t k, std::size_t n,
                   const float* a, const float* b, float beta, float* c) {
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < m; ++i) {
    float* ci = c + i * n;
    if (beta == 0.0f) {
      std::fill(ci, ci + n, 0.0f);
    } else if (beta != 1.0f) {
      for (std::size_t j = 0; j < n; ++j) ci[j] *= beta;
    }
    const float* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const float32x4_t a0 = vdupq_n_f32(ai[p]);
      const float* b0 = b + p * n;
      std::size_t j = 0;
      for (; j < n4; j += 4) {
        float32x4_t acc = vld1q_f32(ci + j);
        acc = vfmaq_f32(acc, a0, vld1q_f32(b0 + j));
        vst1q_f32(ci + j, acc);
      }
      for (; j < n; ++j) ci[j] += ai[p] * b0[j];
    }
  }
}

void axpy_f32_neon(std::size_t n, float alpha, const float* x, float* y) {
  const float32x4_t va = vdupq_n_f32(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void blend_f32_neon(std::size_t n, float a, const float* x,
                    float b, const float* y, float* z) {
  const float32x4_t va = vdupq_n_f32(a);
  const float32x4_t vb = vdupq_n_f32(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t t = vmulq_f32(vb, vld1q_f32(y + i));
    vst1q_f32(z + i, vfmaq_f32(t, va, vld1q_f32(x + i)));
  }
  for (; i < n; ++i) z[i] = a * x[i] + b * y[i];
}

void relu_f32_neon(std::size_t n, const float* x, float* y) {
  const float32x4_t zero = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vst1q_f32(y + i, vmaxq_f32(vld1q_f32(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_grad_f32_neon(std::size_t n, const float* y, const float* dy,
                        float* dx) {
  const float32x4_t zero = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const uint32x4_t mask = vcgtq_f32(vld1q_f32(y + i), zero);
    const float32x4_t g = vreinterpretq_f32_u32(
        vandq_u32(mask, vreinterpretq_u32_f32(vld1q_f32(dy + i))));
    vst1q_f32(dx + i, vaddq_f32(vld1q_f32(dx + i), g));
  }
  for (; i < n; ++i)
    if (y[i] > 0.0f) dx[i] += dy[i];
}

void clamp01_f32_neon(std::size_t n, float* x) {
  const float32x4_t zero = vdupq_n_f32(0.0f);
  const float32x4_t one = vdupq_n_f32(1.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vst1q_f32(x + i, vminq_f32(vmaxq_f32(vld1q_f32(x + i), zero), one));
  for (; i < n; ++i) x[i] = std::clamp(x[i], 0.0f, 1.0f);
}

double sum_f32_neon(std::size_t n, const float* x) {
  double acc = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t v = vld1q_f32(x + i);
    acc += vaddvq_f64(vcvt_f64_f32(vget_low_f32(v)));
    acc += vaddvq_f64(vcvt_f64_f32(vget_high_f32(v)));
  }
  for (; i < n; ++i) acc += static_cast<double>(x[i]);
  return acc;
}

double sumsq_f32_neon(std::size_t n, const float* x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += static_cast<double>(x[i]) * static_cast<double>(x[i]);
  return acc;
}

double squared_l2_f32_neon(std::size_t n, const float* x, const float* y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    acc += d * d;
  }
  return acc;
}

}  // namespace

const KernelTable* neon_table() {
  const KernelTable& ref = scalar_table();
  static const KernelTable t = {
      gemm_f32_neon,      ref.gemm_f64,
      axpy_f32_neon,      ref.axpy_f64,
      blend_f32_neon,
      relu_f32_neon,      ref.relu_f64,
      relu_grad_f32_neon, ref.relu_grad_f64,
      clamp01_f32_neon,
      sum_f32_neon,       ref.sum_f64,
      sumsq_f32_neon,
      squared_l2_f32_neon,
  };
  return &t;
}

}  // namespace deeprepair::kernels

#else

namespace deeprepair::kernels {
const KernelTable* neon_table() { return nullptr; }
}  // namespace deeprepair::kernels

#endif
