#include "savcd/image.hpp"

#include <cstdio>
#include <stdexcept>

namespace savcd {

void validate_image(const RasterImage& img) {
    if (img.height < 2 || img.width < 2) {
        throw std::invalid_argument("RasterImage: dimensions must be >= 2x2");
    }
    const auto expected =
        static_cast<std::size_t>(img.height) * img.width * 3;
    if (img.pixels.size() != expected) {
        throw std::invalid_argument("RasterImage: pixel buffer size mismatch");
    }
}

RasterImage make_image(int height, int width, std::uint8_t fill) {
    RasterImage img;
    img.height = height;
    img.width = width;
    img.pixels.assign(static_cast<std::size_t>(height) * width * 3, fill);
    validate_image(img);
    return img;
}

std::string image_digest_hex(const RasterImage& img) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    const auto mix = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= 0x100000001B3ULL;
    };
    const auto mix_u32 = [&mix](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            mix(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    };
    mix_u32(static_cast<std::uint32_t>(img.height));
    mix_u32(static_cast<std::uint32_t>(img.width));
    for (const auto b : img.pixels) {
        mix(b);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

bool operator==(const RasterImage& a, const RasterImage& b) {
    return a.height == b.height && a.width == b.width && a.pixels == b.pixels;
}

} // namespace savcd
