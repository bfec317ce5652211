#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "deeprepair/image.hpp"

namespace deeprepair {

// Reads an 8-bit PNG as RGB, scaled to [0,1].
Image read_png(const std::filesystem::path& path);

// Writes interleaved RGB8 pixels.
void write_png_rgb8(const std::filesystem::path& path,
                    const std::vector<std::uint8_t>& rgb,
                    int width, int height);

void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace deeprepair
