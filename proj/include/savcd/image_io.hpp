#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "savcd/image.hpp"

namespace savcd {

// 8-bit RGB PNG codec. Inputs in other PNG layouts (gray, palette, alpha)
// are converted to RGB on read. All failures throw ImageIoError.

RasterImage decode_png(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png(const RasterImage& image);

RasterImage read_png_file(const std::string& path);
void write_png_file(const std::string& path, const RasterImage& image);

}  // namespace savcd
