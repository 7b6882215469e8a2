#pragma once

#include <png.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "motionfield/grid.hpp"
#include "motionfield/io/flo.hpp"

namespace motionfield::io {

/// 8-bit quantization used for every PNG the engine writes.
inline std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline std::vector<std::uint8_t> encode_png(const ImageFrame& image) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width());
    img.height = static_cast<png_uint_32>(image.height());
    switch (image.channels()) {
        case 1: img.format = PNG_FORMAT_GRAY; break;
        case 3: img.format = PNG_FORMAT_RGB; break;
        default: img.format = PNG_FORMAT_RGBA; break;
    }
    std::vector<std::uint8_t> pixels(image.values().size());
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = to_byte(image.values()[i]);

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
        throw Error(module_name::pipeline, ErrorKind::io, std::string("PNG encode failed: ") + img.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
        throw Error(module_name::pipeline, ErrorKind::io, std::string("PNG encode failed: ") + img.message);
    }
    out.resize(size);
    return out;
}

/// Decodes to 1, 3 or 4 channels depending on the stored colour type.
inline ImageFrame decode_png(std::span<const std::uint8_t> bytes) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
        throw Error(module_name::pipeline, ErrorKind::format, std::string("PNG decode failed: ") + img.message);
    }
    int channels = 3;
    if (img.format & PNG_FORMAT_FLAG_ALPHA) {
        img.format = PNG_FORMAT_RGBA;
        channels = 4;
    } else if (!(img.format & PNG_FORMAT_FLAG_COLOR)) {
        img.format = PNG_FORMAT_GRAY;
        channels = 1;
    } else {
        img.format = PNG_FORMAT_RGB;
    }
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
        png_image_free(&img);
        throw Error(module_name::pipeline, ErrorKind::format, std::string("PNG decode failed: ") + img.message);
    }
    ImageFrame out(static_cast<int>(img.height), static_cast<int>(img.width), channels);
    for (std::size_t i = 0; i < pixels.size(); ++i) out.values()[i] = pixels[i] / 255.0;
    return out;
}

inline void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(module_name::pipeline, ErrorKind::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(module_name::pipeline, ErrorKind::io, "failed writing " + path.string());
}

inline void write_png(const std::filesystem::path& path, const ImageFrame& image) {
    write_bytes(path, encode_png(image));
}

inline ImageFrame read_png(const std::filesystem::path& path) { return decode_png(read_file_bytes(path)); }

/// Mask from a PNG: a pixel is on when its first channel is >= 0.5.
inline RegionMask mask_from_image(const ImageFrame& image) {
    RegionMask mask(image.height(), image.width());
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) mask.set(y, x, image(y, x, 0) >= 0.5);
    }
    return mask;
}

inline ImageFrame mask_to_image(const RegionMask& mask) {
    ImageFrame image(mask.height(), mask.width(), 1);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) image(y, x, 0) = mask(y, x) ? 1.0 : 0.0;
    }
    return image;
}

inline RegionMask read_mask_png(const std::filesystem::path& path) { return mask_from_image(read_png(path)); }

}  // namespace motionfield::io
