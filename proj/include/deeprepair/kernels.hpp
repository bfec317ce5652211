// Runtime-dispatched arithmetic kernels.
//
// Every operation has a scalar reference implementation plus SIMD variants
// (AVX2 on x86-64, NEON on aarch64) selected once at startup.  The scalar
// path is the semantic reference; the SIMD paths are equivalence-tested
// against it.  All matrices are dense row-major.

#pragma once

#include <cstddef>
#include <string>

namespace deeprepair::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string isa_name(Isa isa);

// ISA chosen by CPU detection (or overridden via force_isa).
Isa active_isa();
// Best ISA the current CPU supports.
Isa best_isa();
// Override dispatch, e.g. to pin the scalar reference in tests.
// Throws std::invalid_argument if the CPU lacks the requested ISA.
void force_isa(Isa isa);

// C (m x n) = A (m x k) * B (k x n) + beta * C
void gemm(std::size_t m, std::size_t k, std::size_t n,
          const float* a, const float* b, float beta, float* c);
void gemm(std::size_t m, std::size_t k, std::size_t n,
          const double* a, const double* b, double beta, double* c);

// y += alpha * x
void axpy(std::size_t n, float alpha, const float* x, float* y);
void axpy(std::size_t n, double alpha, const double* x, double* y);

// z = a*x + b*y
void blend(std::size_t n, float a, const float* x,
           float b, const float* y, float* z);

// y = max(x, 0)
void relu(std::size_t n, const float* x, float* y);
void relu(std::size_t n, const double* x, double* y);

// dx += dy at positions where y > 0
void relu_grad(std::size_t n, const float* y, const float* dy, float* dx);
void relu_grad(std::size_t n, const double* y, const double* dy, double* dx);

// x = min(max(x, 0), 1)
void clamp01(std::size_t n, float* x);

double sum(std::size_t n, const float* x);
double sum(std::size_t n, const double* x);
double sumsq(std::size_t n, const float* x);

// || x - y ||^2
double squared_l2(std::size_t n, const float* x, const float* y);

// Dispatch table; one instance per ISA.  Exposed so tests can compare
// implementations directly.
struct KernelTable {
  void (*gemm_f32)(std::size_t, std::size_t, std::size_t,
                   const float*, const float*, float, float*);
  void (*gemm_f64)(std::size_t, std::size_t, std::size_t,
                   const double*, const double*, double, double*);
  void (*axpy_f32)(std::size_t, float, const float*, float*);
  void (*axpy_f64)(std::size_t, double, const double*, double*);
  void (*blend_f32)(std::size_t, float, const float*, float, const float*, float*);
  void (*relu_f32)(std::size_t, const float*, float*);
  void (*relu_f64)(std::size_t, const double*, double*);
  void (*relu_grad_f32)(std::size_t, const float*, const float*, float*);
  void (*relu_grad_f64)(std::size_t, const double*, const double*, double*);
  void (*clamp01_f32)(std::size_t, float*);
  double (*sum_f32)(std::size_t, const float*);
  double (*sum_f64)(std::size_t, const double*);
  double (*sumsq_f32)(std::size_t, const float*);
  double (*squared_l2_f32)(std::size_t, const float*, const float*);
};

const KernelTable& scalar_table();
// Returns nullptr when the build or CPU does not support the ISA.
const KernelTable* avx2_table();
const KernelTable* neon_table();
const KernelTable& table_for(Isa isa);

}  // namespace deeprepair::kernels
