// Deterministic random source.  xoshiro256++ with hand-rolled
// distributions so that sampled values do not depend on the standard
// library implementation.  Streams derived via `stream()` are
// independent and reproducible, which is what the per-(seed, epoch,
// sample) augmentation contract relies on.

#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace deeprepair {

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Deterministic child stream keyed by up to three integers.
  Rng stream(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [lo, hi] inclusive.
  long uniform_int(long lo, long hi);

  // Standard normal (polar Marsaglia, spare cached).
  double normal();
  double normal(double mean, double stddev);

  // Gamma(shape, 1), shape > 0 (Marsaglia–Tsang).
  double gamma(double shape);
  double beta(double a, double b);
  // out[0..n) ~ Dirichlet(alpha, ..., alpha); sums to 1.
  void dirichlet(double alpha, std::size_t n, double* out);
  long poisson(double lambda);

  // Fisher–Yates over indices 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::array<std::uint64_t, 4> state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// SplitMix64 step; also used to combine seed components.
std::uint64_t splitmix64(std::uint64_t& x);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

}  // namespace deeprepair
