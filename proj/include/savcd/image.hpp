#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace savcd {

// 8-bit RGB raster, row-major, channel-interleaved. Minimum 2x2 so that
// half-size patches are well defined.
struct RasterImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels; // height * width * 3

    std::uint8_t& at(int y, int x, int c) {
        return pixels[static_cast<std::size_t>((y * width + x) * 3 + c)];
    }
    std::uint8_t at(int y, int x, int c) const {
        return pixels[static_cast<std::size_t>((y * width + x) * 3 + c)];
    }

    bool same_dimensions(const RasterImage& other) const noexcept {
        return height == other.height && width == other.width;
    }
};

// Throws std::invalid_argument when dimensions or buffer size are off.
void validate_image(const RasterImage& img);

RasterImage make_image(int height, int width, std::uint8_t fill = 0);

// FNV-1a 64 over dimensions and pixel bytes, hex-encoded. Identifies image
// content across the process boundary (scripted backends key on it).
std::string image_digest_hex(const RasterImage& img);

bool operator==(const RasterImage& a, const RasterImage& b);

} // namespace savcd
