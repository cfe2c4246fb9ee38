#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"

namespace dentgan {

/// Interleaved (HWC) image with a fixed channel count.
template <typename T, std::size_t Channels>
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<T> data;

    Image() = default;
    Image(std::size_t w, std::size_t h, T fill = T{})
        : width(w), height(h), data(w * h * Channels, fill) {}

    static constexpr std::size_t channels = Channels;

    bool empty() const noexcept { return width == 0 || height == 0; }
    std::size_t pixel_count() const noexcept { return width * height; }

    T& at(std::size_t x, std::size_t y, std::size_t c = 0) { return data[(y * width + x) * Channels + c]; }
    const T& at(std::size_t x, std::size_t y, std::size_t c = 0) const {
        return data[(y * width + x) * Channels + c];
    }

    friend bool operator==(const Image&, const Image&) = default;
};

using GrayImage = Image<std::uint8_t, 1>;
using RgbImage = Image<std::uint8_t, 3>;
using RgbFloatImage = Image<float, 3>;

/// Row-major class-id map. Values are checked against the palette size by
/// `validate_mask`.
using IndexMask = Image<std::uint8_t, 1>;

inline constexpr std::uint8_t kNumClasses = 8;

inline void validate_mask(const IndexMask& m) {
    if (m.empty()) throw DimensionMismatch("mask has zero extent");
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        if (m.data[i] >= kNumClasses) {
            throw InvalidSpec("mask value " + std::to_string(m.data[i]) + " at index " + std::to_string(i) +
                              " is not a class id");
        }
    }
}

/// One training/evaluation example with provenance.
struct SamplePair {
    std::string id;
    GrayImage radiograph;
    IndexMask mask;

    friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

inline void check_pair(const SamplePair& p) {
    if (p.radiograph.width != p.mask.width || p.radiograph.height != p.mask.height) {
        throw DimensionMismatch(p.id + ": radiograph " + std::to_string(p.radiograph.width) + "x" +
                                std::to_string(p.radiograph.height) + " vs mask " + std::to_string(p.mask.width) +
                                "x" + std::to_string(p.mask.height));
    }
}

}  // namespace dentgan
