// In-memory JPEG round trip (libjpeg).  Used by the JPEG corruption
// kind, which degrades images through real encoding at low quality.

#pragma once

#include "deeprepair/image.hpp"

namespace deeprepair {

// Encodes to JPEG at `quality` (1..100) and decodes back.  Input must be
// 1- or 3-channel; output has the same shape.
Image jpeg_roundtrip(const Image& input, int quality);

}  // namespace deeprepair
