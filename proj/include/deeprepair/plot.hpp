// Tiny software rasterizer for the report figures (grouped bars and a
// radar chart), written out as PNG.  No external plotting dependency.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace deeprepair {

struct Color {
  std::uint8_t r = 0, g = 0, b = 0;
};

class Canvas {
 public:
  Canvas(int width, int height, Color bg = {255, 255, 255});

  int width() const { return w_; }
  int height() const { return h_; }

  void set(int x, int y, Color c);
  void line(double x0, double y0, double x1, double y1, Color c);
  void fill_rect(int x, int y, int w, int h, Color c);
  // 5x7 bitmap font, scale >= 1; lowercase renders as uppercase.
  void text(int x, int y, const std::string& s, Color c, int scale = 1);
  int text_width(const std::string& s, int scale = 1) const;

  void save(const std::filesystem::path& path) const;

 private:
  int w_, h_;
  std::vector<std::uint8_t> px_;  // interleaved RGB
};

struct DataSeries {
  std::string name;
  std::vector<double> values;
};

// One bar group per label, one bar per series within the group.
// Values are fractions in [0, 1] (rendered as percent).
void plot_grouped_bars(const std::filesystem::path& path,
                       const std::string& title,
                       const std::vector<std::string>& group_labels,
                       const std::vector<DataSeries>& series);

// Radar chart over the given axes; values are fractions in [0, 1].
void plot_radar(const std::filesystem::path& path, const std::string& title,
                const std::vector<std::string>& axis_labels,
                const std::vector<DataSeries>& series);

}  // namespace deeprepair
