// Minimal NPY (v1.0) reader/writer for C-contiguous uint8 arrays.
// Ingested corrupted test sets use this format: one file per corruption
// kind, shape (5*N, H, W, C), severity-major.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace deeprepair {

std::vector<std::uint8_t> read_npy_u8(const std::filesystem::path& path,
                                      std::vector<std::size_t>& shape_out);

void write_npy_u8(const std::filesystem::path& path,
                  const std::vector<std::uint8_t>& data,
                  const std::vector<std::size_t>& shape);

}  // namespace deeprepair
