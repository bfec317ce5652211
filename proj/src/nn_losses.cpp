#include <cmath>

#include "deeprepair/errors.hpp"
#include "deeprepair/nn/losses.hpp"

namespace deeprepair::nn {

namespace {

void check_distribution(const std::vector<double>& p, std::size_t k) {
  if (p.size() != k) throw ValidationError("js_divergence: length mismatch");
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) throw ValidationError("js_divergence: negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw ValidationError("js_divergence: distribution does not sum to 1");
}

}  // namespace

double js_divergence(const std::vector<double>& p, const std::vector<double>& p1,
                     const std::vector<double>& p2) {
  const std::size_t k = p.size();
  if (k == 0) throw ValidationError("js_divergence: empty distribution");
  check_distribution(p, k);
  check_distribution(p1, k);
  check_distribution(p2, k);
  double js = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double m = (p[j] + p1[j] + p2[j]) / 3.0;
    for (const auto* d : {&p, &p1, &p2}) {
      const double v = (*d)[j];
      if (v > 0.0) js += v * std::log(v / std::max(m, kProbFloor)) / 3.0;
    }
  }
  return std::max(0.0, js);
}

}  // namespace deeprepair::nn
