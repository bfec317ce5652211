#include "deeprepair/jpeg_codec.hpp"

#include <cstdio>
#include <cstdlib>

#include <jpeglib.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <vector>

#include "deeprepair/errors.hpp"

namespace deeprepair {
namespace {

struct ErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

void error_exit(j_common_ptr cinfo) {
  ErrorMgr* mgr = reinterpret_cast<ErrorMgr*>(cinfo->err);
  std::longjmp(mgr->jump, 1);
}

}  // namespace

Image jpeg_roundtrip(const Image& input, int quality) {
  const int channels = input.shape.channels;
  if (channels != 1 && channels != 3)
    throw ValidationError("jpeg: only 1- or 3-channel images supported");
  if (quality < 1 || quality > 100)
    throw ConfigError("jpeg: quality must be in [1,100]");

  const int h = input.shape.height, w = input.shape.width;

  // CHW float -> interleaved u8
  std::vector<JSAMPLE> pixels(static_cast<std::size_t>(h) * w * channels);
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const float v = std::fmin(std::fmax(input.at(c, y, x), 0.0f), 1.0f);
        pixels[(static_cast<std::size_t>(y) * w + x) * channels + c] =
            static_cast<JSAMPLE>(std::lround(v * 255.0f));
      }

  ErrorMgr err;
  unsigned char* buffer = nullptr;
  unsigned long buffer_size = 0;

  // encode
  {
    jpeg_compress_struct cinfo;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = error_exit;
    if (setjmp(err.jump)) {
      jpeg_destroy_compress(&cinfo);
      std::free(buffer);
      throw LoadError("jpeg: encode failed");
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buffer, &buffer_size);
    cinfo.image_width = static_cast<JDIMENSION>(w);
    cinfo.image_height = static_cast<JDIMENSION>(h);
    cinfo.input_components = channels;
    cinfo.in_color_space = channels == 3 ? JCS_RGB : JCS_GRAYSCALE;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
      JSAMPROW row =
          pixels.data() + static_cast<std::size_t>(cinfo.next_scanline) * w * channels;
      jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
  }

  // decode
  Image out(input.shape);
  {
    jpeg_decompress_struct dinfo;
    dinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = error_exit;
    if (setjmp(err.jump)) {
      jpeg_destroy_decompress(&dinfo);
      std::free(buffer);
      throw LoadError("jpeg: decode failed");
    }
    jpeg_create_decompress(&dinfo);
    jpeg_mem_src(&dinfo, buffer, buffer_size);
    jpeg_read_header(&dinfo, TRUE);
    dinfo.out_color_space = channels == 3 ? JCS_RGB : JCS_GRAYSCALE;
    jpeg_start_decompress(&dinfo);

    std::vector<JSAMPLE> row(static_cast<std::size_t>(w) * channels);
    int y = 0;
    while (dinfo.output_scanline < dinfo.output_height) {
      JSAMPROW rp = row.data();
      jpeg_read_scanlines(&dinfo, &rp, 1);
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < channels; ++c)
          out.at(c, y, x) =
              static_cast<float>(row[static_cast<std::size_t>(x) * channels + c]) /
              255.0f;
      ++y;
    }
    jpeg_finish_decompress(&dinfo);
    jpeg_destroy_decompress(&dinfo);
  }
  std::free(buffer);
  return out;
}

}  // namespace deeprepair
