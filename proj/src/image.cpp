#include "deeprepair/image.hpp"

#include <cmath>
#include <stdexcept>

#include "deeprepair/kernels.hpp"

namespace deeprepair {

ChannelStats channel_stats(const float* px, std::size_t n) {
  ChannelStats st;
  if (n == 0) return st;
  const double s = kernels::sum(n, px);
  const double ss = kernels::sumsq(n, px);
  st.mean = s / static_cast<double>(n);
  const double var = ss / static_cast<double>(n) - st.mean * st.mean;
  st.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
  return st;
}

double mse(const Image& a, const Image& b) {
  if (!(a.shape == b.shape)) throw std::invalid_argument("mse: shape mismatch");
  if (a.data.empty()) return 0.0;
  return kernels::squared_l2(a.data.size(), a.data.data(), b.data.data()) /
         static_cast<double>(a.data.size());
}

void clamp01(Image& img) {
  kernels::clamp01(img.data.size(), img.data.data());
}

}  // namespace deeprepair
