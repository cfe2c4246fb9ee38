#pragma once

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "image.hpp"

namespace dentgan::png {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open(const std::filesystem::path& p, const char* mode) {
    FilePtr f(std::fopen(p.c_str(), mode));
    if (!f) throw IoError("cannot open " + p.string());
    return f;
}

[[noreturn]] inline void on_error(png_structp png, png_const_charp msg) {
    auto* what = static_cast<std::string*>(png_get_error_ptr(png));
    if (what) *what = msg;
    png_longjmp(png, 1);
}

inline void on_warning(png_structp, png_const_charp) {}

/// Decode any 8-bit-expandable PNG into `Channels` (1 = gray, 3 = rgb).
template <std::size_t Channels>
Image<std::uint8_t, Channels> read(const std::filesystem::path& path) {
    auto file = open(path, "rb");
    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_error, on_warning);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    Image<std::uint8_t, Channels> img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path.string() + ": " + err);
    }
    png_init_io(png, file.get());
    png_read_info(png, info);

    const auto color = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_strip_alpha(png);
    const bool is_gray = color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA;
    if constexpr (Channels == 1) {
        if (!is_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    } else {
        if (is_gray) png_set_gray_to_rgb(png);
    }
    png_read_update_info(png, info);

    img = Image<std::uint8_t, Channels>(png_get_image_width(png, info), png_get_image_height(png, info));
    if (png_get_rowbytes(png, info) != img.width * Channels) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path.string() + ": unexpected row layout");
    }
    rows.resize(img.height);
    for (std::size_t y = 0; y < img.height; ++y) rows[y] = img.data.data() + y * img.width * Channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

template <std::size_t Channels>
void write(const std::filesystem::path& path, const Image<std::uint8_t, Channels>& img) {
    static_assert(Channels == 1 || Channels == 3);
    if (img.empty()) throw IoError("refusing to write empty image " + path.string());
    auto file = open(path, "wb");
    std::string err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_error, on_warning);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    std::vector<png_const_bytep> rows(img.height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(path.string() + ": " + err);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 Channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // Fixed settings keep output bytes reproducible.
    png_set_compression_level(png, 6);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
    png_write_info(png, info);
    for (std::size_t y = 0; y < img.height; ++y) rows[y] = img.data.data() + y * img.width * Channels;
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace detail

inline GrayImage read_gray(const std::filesystem::path& p) { return detail::read<1>(p); }
inline RgbImage read_rgb(const std::filesystem::path& p) { return detail::read<3>(p); }
inline void write(const std::filesystem::path& p, const GrayImage& img) { detail::write<1>(p, img); }
inline void write(const std::filesystem::path& p, const RgbImage& img) { detail::write<3>(p, img); }

}  // namespace dentgan::png
