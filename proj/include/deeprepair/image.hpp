// Image value type.  Pixels are float in [0,1], stored CHW.

#pragma once

#include <cstddef>
#include <vector>

namespace deeprepair {

struct ImageShape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t pixels() const {
    return static_cast<std::size_t>(height) * width;
  }
  std::size_t size() const { return pixels() * channels; }
  bool operator==(const ImageShape&) const = default;
};

struct Image {
  ImageShape shape;
  std::vector<float> data;  // CHW

  Image() = default;
  Image(ImageShape s, float fill = 0.0f) : shape(s), data(s.size(), fill) {}

  float& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * shape.height + y) * shape.width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * shape.height + y) * shape.width + x];
  }
  float* channel(int c) { return data.data() + c * shape.pixels(); }
  const float* channel(int c) const { return data.data() + c * shape.pixels(); }
};

struct ChannelStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

ChannelStats channel_stats(const float* px, std::size_t n);

// Mean squared difference between two equally-shaped images.
double mse(const Image& a, const Image& b);

void clamp01(Image& img);

}  // namespace deeprepair
