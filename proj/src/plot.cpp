#include "deeprepair/plot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "deeprepair/errors.hpp"
#include "deeprepair/png_io.hpp"

namespace deeprepair {

namespace {

// 5x7 font, one byte per column, bit 0 = top row.
struct Glyph {
  char ch;
  std::uint8_t col[5];
};

constexpr Glyph kFont[] = {
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00}},
    {'%', {0x23, 0x13, 0x08, 0x64, 0x62}},
    {'(', {0x00, 0x1C, 0x22, 0x41, 0x00}},
    {')', {0x00, 0x41, 0x22, 0x1C, 0x00}},
    {'+', {0x08, 0x08, 0x3E, 0x08, 0x08}},
    {'-', {0x08, 0x08, 0x08, 0x08, 0x08}},
    {'.', {0x00, 0x60, 0x60, 0x00, 0x00}},
    {'/', {0x20, 0x10, 0x08, 0x04, 0x02}},
    {'0', {0x3E, 0x51, 0x49, 0x45, 0x3E}},
    {'1', {0x00, 0x42, 0x7F, 0x40, 0x00}},
    {'2', {0x42, 0x61, 0x51, 0x49, 0x46}},
    {'3', {0x21, 0x41, 0x45, 0x4B, 0x31}},
    {'4', {0x18, 0x14, 0x12, 0x7F, 0x10}},
    {'5', {0x27, 0x45, 0x45, 0x45, 0x39}},
    {'6', {0x3C, 0x4A, 0x49, 0x49, 0x30}},
    {'7', {0x01, 0x71, 0x09, 0x05, 0x03}},
    {'8', {0x36, 0x49, 0x49, 0x49, 0x36}},
    {'9', {0x06, 0x49, 0x49, 0x29, 0x1E}},
    {':', {0x00, 0x36, 0x36, 0x00, 0x00}},
    {'A', {0x7E, 0x11, 0x11, 0x11, 0x7E}},
    {'B', {0x7F, 0x49, 0x49, 0x49, 0x36}},
    {'C', {0x3E, 0x41, 0x41, 0x41, 0x22}},
    {'D', {0x7F, 0x41, 0x41, 0x22, 0x1C}},
    {'E', {0x7F, 0x49, 0x49, 0x49, 0x41}},
    {'F', {0x7F, 0x09, 0x09, 0x09, 0x01}},
    {'G', {0x3E, 0x41, 0x49, 0x49, 0x7A}},
    {'H', {0x7F, 0x08, 0x08, 0x08, 0x7F}},
    {'I', {0x00, 0x41, 0x7F, 0x41, 0x00}},
    {'J', {0x20, 0x40, 0x41, 0x3F, 0x01}},
    {'K', {0x7F, 0x08, 0x14, 0x22, 0x41}},
    {'L', {0x7F, 0x40, 0x40, 0x40, 0x40}},
    {'M', {0x7F, 0x02, 0x0C, 0x02, 0x7F}},
    {'N', {0x7F, 0x04, 0x08, 0x10, 0x7F}},
    {'O', {0x3E, 0x41, 0x41, 0x41, 0x3E}},
    {'P', {0x7F, 0x09, 0x09, 0x09, 0x06}},
    {'Q', {0x3E, 0x41, 0x51, 0x21, 0x5E}},
    {'R', {0x7F, 0x09, 0x19, 0x29, 0x46}},
    {'S', {0x46, 0x49, 0x49, 0x49, 0x31}},
    {'T', {0x01, 0x01, 0x7F, 0x01, 0x01}},
    {'U', {0x3F, 0x40, 0x40, 0x40, 0x3F}},
    {'V', {0x1F, 0x20, 0x40, 0x20, 0x1F}},
    {'W', {0x3F, 0x40, 0x38, 0x40, 0x3F}},
    {'X', {0x63, 0x14, 0x08, 0x14, 0x63}},
    {'Y', {0x07, 0x08, 0x70, 0x08, 0x07}},
    {'Z', {0x61, 0x51, 0x49, 0x45, 0x43}},
    {'_', {0x40, 0x40, 0x40, 0x40, 0x40}},
};

const Glyph* find_glyph(char ch) {
  const char up = char(std::toupper(static_cast<unsigned char>(ch)));
  for (const auto& g : kFont)
    if (g.ch == up) return &g;
  return nullptr;
}

const Color kSeriesColors[] = {
    {66, 103, 178}, {214, 69, 65},  {46, 139, 87},
    {230, 145, 30}, {120, 81, 169}, {64, 64, 64},
};

Color series_color(std::size_t i) {
  return kSeriesColors[i % (sizeof(kSeriesColors) / sizeof(Color))];
}

}  // namespace

Canvas::Canvas(int width, int height, Color bg) : w_(width), h_(height) {
  if (width <= 0 || height <= 0) throw ValidationError("canvas: bad size");
  px_.resize(std::size_t(width) * height * 3);
  for (int y = 0; y < h_; ++y)
    for (int x = 0; x < w_; ++x) set(x, y, bg);
}

void Canvas::set(int x, int y, Color c) {
  if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
  std::uint8_t* p = px_.data() + (std::size_t(y) * w_ + x) * 3;
  p[0] = c.r;
  p[1] = c.g;
  p[2] = c.b;
}

void Canvas::line(double x0, double y0, double x1, double y1, Color c) {
  const double dx = x1 - x0, dy = y1 - y0;
  const int steps = std::max(1, int(std::ceil(std::max(std::abs(dx),
                                                       std::abs(dy)))));
  for (int i = 0; i <= steps; ++i) {
    const double t = double(i) / steps;
    set(int(std::lround(x0 + t * dx)), int(std::lround(y0 + t * dy)), c);
  }
}

void Canvas::fill_rect(int x, int y, int w, int h, Color c) {
  for (int yy = y; yy < y + h; ++yy)
    for (int xx = x; xx < x + w; ++xx) set(xx, yy, c);
}

void Canvas::text(int x, int y, const std::string& s, Color c, int scale) {
  int cx = x;
  for (char ch : s) {
    const Glyph* g = find_glyph(ch);
    if (g) {
      for (int col = 0; col < 5; ++col)
        for (int row = 0; row < 7; ++row)
          if (g->col[col] & (1 << row))
            fill_rect(cx + col * scale, y + row * scale, scale, scale, c);
    }
    cx += 6 * scale;
  }
}

int Canvas::text_width(const std::string& s, int scale) const {
  return int(s.size()) * 6 * scale;
}

void Canvas::save(const std::filesystem::path& path) const {
  write_png_rgb8(path, px_, w_, h_);
}

void plot_grouped_bars(const std::filesystem::path& path,
                       const std::string& title,
                       const std::vector<std::string>& group_labels,
                       const std::vector<DataSeries>& series) {
  if (series.empty() || group_labels.empty())
    throw ValidationError("bars: nothing to plot");
  for (const auto& s : series)
    if (s.values.size() != group_labels.size())
      throw ValidationError("bars: series length mismatch");

  const int w = std::max(560, 80 + int(group_labels.size()) *
                                  (24 * int(series.size()) + 28));
  const int h = 360;
  const int left = 56, right = w - 16, top = 48, bottom = h - 56;
  Canvas cv(w, h);
  const Color axis{40, 40, 40}, grid{220, 220, 220};
  cv.text(16, 12, title, axis, 2);

  for (int tick = 0; tick <= 10; ++tick) {
    const int y = bottom - (bottom - top) * tick / 10;
    cv.line(left, y, right, y, tick == 0 ? axis : grid);
    cv.text(left - 40, y - 3, std::to_string(tick * 10) + "%", axis);
  }
  cv.line(left, top, left, bottom, axis);

  const int group_w = (right - left) / int(group_labels.size());
  const int bar_w = std::max(4, (group_w - 16) / int(series.size()));
  for (std::size_t g = 0; g < group_labels.size(); ++g) {
    const int gx = left + int(g) * group_w + 8;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = std::clamp(series[s].values[g], 0.0, 1.0);
      const int bh = int(std::lround((bottom - top) * v));
      cv.fill_rect(gx + int(s) * bar_w, bottom - bh, bar_w - 2, bh,
                   series_color(s));
    }
    cv.text(gx, bottom + 8, group_labels[g], axis);
  }
  int lx = left;
  for (std::size_t s = 0; s < series.size(); ++s) {
    cv.fill_rect(lx, h - 24, 10, 10, series_color(s));
    cv.text(lx + 14, h - 23, series[s].name, axis);
    lx += 26 + cv.text_width(series[s].name);
  }
  cv.save(path);
}

void plot_radar(const std::filesystem::path& path, const std::string& title,
                const std::vector<std::string>& axis_labels,
                const std::vector<DataSeries>& series) {
  if (axis_labels.size() < 3) throw ValidationError("radar: need >= 3 axes");
  for (const auto& s : series)
    if (s.values.size() != axis_labels.size())
      throw ValidationError("radar: series length mismatch");

  const int w = 560, h = 560;
  const double cx = w / 2.0, cy = h / 2.0 + 12, radius = 190;
  Canvas cv(w, h);
  const Color axis{40, 40, 40}, grid{210, 210, 210};
  cv.text(16, 12, title, axis, 2);

  const std::size_t n = axis_labels.size();
  auto point = [&](std::size_t i, double r) {
    const double ang = -M_PI / 2 + 2 * M_PI * double(i) / double(n);
    return std::pair<double, double>{cx + r * std::cos(ang),
                                     cy + r * std::sin(ang)};
  };
  for (int ring = 1; ring <= 4; ++ring) {
    const double r = radius * ring / 4.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto [x0, y0] = point(i, r);
      auto [x1, y1] = point((i + 1) % n, r);
      cv.line(x0, y0, x1, y1, grid);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto [x1, y1] = point(i, radius);
    cv.line(cx, cy, x1, y1, grid);
    auto [lx, ly] = point(i, radius + 18);
    cv.text(int(lx) - cv.text_width(axis_labels[i]) / 2, int(ly) - 4,
            axis_labels[i], axis);
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const Color c = series_color(s);
    for (std::size_t i = 0; i < n; ++i) {
      const double v0 = std::clamp(series[s].values[i], 0.0, 1.0);
      const double v1 = std::clamp(series[s].values[(i + 1) % n], 0.0, 1.0);
      auto [x0, y0] = point(i, radius * v0);
      auto [x1, y1] = point((i + 1) % n, radius * v1);
      cv.line(x0, y0, x1, y1, c);
    }
  }
  int lx = 16;
  for (std::size_t s = 0; s < series.size(); ++s) {
    cv.fill_rect(lx, h - 20, 10, 10, series_color(s));
    cv.text(lx + 14, h - 19, series[s].name, axis);
    lx += 26 + cv.text_width(series[s].name);
  }
  cv.save(path);
}

}  // namespace deeprepair
