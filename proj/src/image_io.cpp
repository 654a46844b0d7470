#include "savcd/image_io.hpp"

#include <png.h>

#include <cstring>
#include <fstream>

#include "savcd/errors.hpp"

namespace savcd {

namespace {

std::string png_message(const png_image& image) {
    return image.message[0] != '\0' ? std::string(image.message)
                                    : std::string("libpng failure");
}

}  // namespace

RasterImage decode_png(const std::vector<std::uint8_t>& bytes) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;

    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw ImageIoError("png decode: " + png_message(image));
    }
    image.format = PNG_FORMAT_RGB;

    RasterImage out;
    out.height = static_cast<int>(image.height);
    out.width = static_cast<int>(image.width);
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        std::string message = png_message(image);
        png_image_free(&image);
        throw ImageIoError("png decode: " + message);
    }
    try {
        validate_image(out);
    } catch (const std::exception& e) {
        throw ImageIoError(std::string("png decode: ") + e.what());
    }
    return out;
}

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
    validate_image(img);
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.pixels.data(), 0,
                                   nullptr)) {
        throw ImageIoError("png encode: " + png_message(image));
    }
    std::vector<std::uint8_t> bytes(size);
    if (!png_image_write_to_memory(&image, bytes.data(), &size, 0,
                                   img.pixels.data(), 0, nullptr)) {
        throw ImageIoError("png encode: " + png_message(image));
    }
    bytes.resize(size);
    return bytes;
}

RasterImage read_png_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ImageIoError("cannot open image file: " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) {
        throw ImageIoError("cannot read image file: " + path);
    }
    return decode_png(bytes);
}

void write_png_file(const std::string& path, const RasterImage& image) {
    std::vector<std::uint8_t> bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ImageIoError("cannot open output file: " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out.good()) {
        throw ImageIoError("cannot write output file: " + path);
    }
}

}  // namespace savcd
