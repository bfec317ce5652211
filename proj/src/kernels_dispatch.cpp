#include "deeprepair/kernels.hpp"

#include <stdexcept>

namespace deeprepair::kernels {
namespace {

Isa detect_best() {
  if (avx2_table() != nullptr) return Isa::kAvx2;
  if (neon_table() != nullptr) return Isa::kNeon;
  return Isa::kScalar;
}

Isa& active_ref() {
  static Isa isa = detect_best();
  return isa;
}

const KernelTable*& active_table_ref() {
  static const KernelTable* t = &table_for(active_ref());
  return t;
}

}  // namespace

std::string isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

Isa best_isa() {
  static const Isa isa = detect_best();
  return isa;
}

Isa active_isa() { return active_ref(); }

const KernelTable& table_for(Isa isa) {
  switch (isa) {
    case Isa::kAvx2:
      if (const KernelTable* t = avx2_table()) return *t;
      break;
    case Isa::kNeon:
      if (const KernelTable* t = neon_table()) return *t;
      break;
    case Isa::kScalar:
      return scalar_table();
  }
  throw std::invalid_argument("kernels: ISA " + isa_name(isa) +
                              " not supported on this CPU");
}

void force_isa(Isa isa) {
  active_table_ref() = &table_for(isa);
  active_ref() = isa;
}

#define DR_ACTIVE (*active_table_ref())

void gemm(std::size_t m, std::size_t k, std::size_t n,
          const float* a, const float* b, float beta, float* c) {
  DR_ACTIVE.gemm_f32(m, k, n, a, b, beta, c);
}
void gemm(std::size_t m, std::size_t k, std::size_t n,
          const double* a, const double* b, double beta, double* c) {
  DR_ACTIVE.gemm_f64(m, k, n, a, b, beta, c);
}
void axpy(std::size_t n, float alpha, const float* x, float* y) {
  DR_ACTIVE.axpy_f32(n, alpha, x, y);
}
void axpy(std::size_t n, double alpha, const double* x, double* y) {
  DR_ACTIVE.axpy_f64(n, alpha, x, y);
}
void blend(std::size_t n, float a, const float* x,
           float b, const float* y, float* z) {
  DR_ACTIVE.blend_f32(n, a, x, b, y, z);
}
void relu(std::size_t n, const float* x, float* y) {
  DR_ACTIVE.relu_f32(n, x, y);
}
void relu(std::size_t n, const double* x, double* y) {
  DR_ACTIVE.relu_f64(n, x, y);
}
void relu_grad(std::size_t n, const float* y, const float* dy, float* dx) {
  DR_ACTIVE.relu_grad_f32(n, y, dy, dx);
}
void relu_grad(std::size_t n, const double* y, const double* dy, double* dx) {
  DR_ACTIVE.relu_grad_f64(n, y, dy, dx);
}
void clamp01(std::size_t n, float* x) { DR_ACTIVE.clamp01_f32(n, x); }
double sum(std::size_t n, const float* x) { return DR_ACTIVE.sum_f32(n, x); }
double sum(std::size_t n, const double* x) { return DR_ACTIVE.sum_f64(n, x); }
double sumsq(std::size_t n, const float* x) { return DR_ACTIVE.sumsq_f32(n, x); }
double squared_l2(std::size_t n, const float* x, const float* y) {
  return DR_ACTIVE.squared_l2_f32(n, x, y);
}

#undef DR_ACTIVE

}  // namespace deeprepair::kernels
