#pragma once

#include <string>

#include "stairloc/camera_model.hpp"

namespace stairloc::io {

// Greyscale portable float map. Writes little-endian (scale -1.0) with the
// format's bottom-to-top scanline order; reads either endianness.
std::string encode_pfm(const DepthFrame& frame);
DepthFrame decode_pfm(const std::string& bytes);

void save_pfm(const std::string& path, const DepthFrame& frame);
DepthFrame load_pfm(const std::string& path);

}  // namespace stairloc::io
