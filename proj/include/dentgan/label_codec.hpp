#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "image.hpp"

namespace dentgan {

using Rgb = std::array<std::uint8_t, 3>;

struct PaletteEntry {
    std::uint8_t class_id;
    std::string_view name;
    Rgb rgb;
};

/// Class ids, fixed by the palette order.
enum ClassId : std::uint8_t {
    kBackground = 0,
    kCaries = 1,
    kEnamel = 2,
    kDentin = 3,
    kPulp = 4,
    kCrown = 5,
    kRestoration = 6,
    kRootCanal = 7,
};

class ClassPalette {
public:
    explicit constexpr ClassPalette(std::array<PaletteEntry, kNumClasses> entries) : entries_(entries) {}

    constexpr const PaletteEntry& operator[](std::size_t id) const { return entries_[id]; }
    constexpr std::size_t size() const { return entries_.size(); }
    constexpr auto begin() const { return entries_.begin(); }
    constexpr auto end() const { return entries_.end(); }

    /// Nearest entry by Euclidean RGB distance; ties go to the lowest id.
    /// Returns the id and the squared distance.
    std::pair<std::uint8_t, int> nearest(const Rgb& c) const {
        std::uint8_t best = 0;
        int best_d2 = std::numeric_limits<int>::max();
        for (const auto& e : entries_) {
            int d2 = 0;
            for (int k = 0; k < 3; ++k) {
                const int d = int(c[k]) - int(e.rgb[k]);
                d2 += d * d;
            }
            if (d2 < best_d2) {
                best_d2 = d2;
                best = e.class_id;
            }
        }
        return {best, best_d2};
    }

private:
    std::array<PaletteEntry, kNumClasses> entries_;
};

inline constexpr ClassPalette default_palette() {
    return ClassPalette({{
        {0, "background", {0, 0, 0}},
        {1, "caries", {0, 0, 255}},
        {2, "enamel", {0, 255, 0}},
        {3, "dentin", {255, 255, 0}},
        {4, "pulp", {255, 0, 0}},
        {5, "crown", {255, 224, 189}},
        {6, "restoration", {255, 165, 0}},
        {7, "root_canal", {0, 255, 255}},
    }});
}

/// Map an RGB mask to class ids. Pixels farther than `tolerance` (Euclidean,
/// in 8-bit units) from every palette color raise UnknownColor.
inline IndexMask encode_mask(const RgbImage& rgb, const ClassPalette& palette, int tolerance) {
    if (rgb.empty()) throw DimensionMismatch("encode_mask: empty image");
    IndexMask out(rgb.width, rgb.height);
    const long long tol2 = static_cast<long long>(tolerance) * tolerance;
    for (std::size_t y = 0; y < rgb.height; ++y) {
        for (std::size_t x = 0; x < rgb.width; ++x) {
            const Rgb c{rgb.at(x, y, 0), rgb.at(x, y, 1), rgb.at(x, y, 2)};
            const auto [id, d2] = palette.nearest(c);
            if (d2 > tol2) {
                throw UnknownColor("pixel (" + std::to_string(x) + "," + std::to_string(y) + ") rgb(" +
                                   std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) +
                                   ")");
            }
            out.at(x, y) = id;
        }
    }
    return out;
}

inline RgbImage decode_mask(const IndexMask& mask, const ClassPalette& palette) {
    validate_mask(mask);
    RgbImage out(mask.width, mask.height);
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
        const auto& rgb = palette[mask.data[i]].rgb;
        std::copy(rgb.begin(), rgb.end(), out.data.begin() + static_cast<std::ptrdiff_t>(3 * i));
    }
    return out;
}

inline float normalize(std::uint8_t v) { return static_cast<float>(static_cast<double>(v) / 127.5 - 1.0); }

/// Clamp to [-1,1], rescale, round half up.
inline std::uint8_t denormalize(double v) {
    v = std::clamp(v, -1.0, 1.0);
    return static_cast<std::uint8_t>(std::floor((v + 1.0) * 127.5 + 0.5));
}

template <std::size_t C>
Image<float, C> normalize(const Image<std::uint8_t, C>& img) {
    Image<float, C> out(img.width, img.height);
    std::transform(img.data.begin(), img.data.end(), out.data.begin(), [](std::uint8_t v) { return normalize(v); });
    return out;
}

template <std::size_t C>
Image<std::uint8_t, C> denormalize(const Image<float, C>& img) {
    Image<std::uint8_t, C> out(img.width, img.height);
    std::transform(img.data.begin(), img.data.end(), out.data.begin(), [](float v) { return denormalize(v); });
    return out;
}

/// Turn a tanh-range RGB prediction into class decisions.
inline IndexMask quantize_output(const RgbFloatImage& generated, const ClassPalette& palette) {
    IndexMask out(generated.width, generated.height);
    for (std::size_t i = 0; i < generated.pixel_count(); ++i) {
        const Rgb c{denormalize(generated.data[3 * i]), denormalize(generated.data[3 * i + 1]),
                    denormalize(generated.data[3 * i + 2])};
        out.data[i] = palette.nearest(c).first;
    }
    return out;
}

/// Mask as the generator's target: palette RGB scaled into [-1,1].
inline RgbFloatImage mask_to_target(const IndexMask& mask, const ClassPalette& palette) {
    return normalize(decode_mask(mask, palette));
}

}  // namespace dentgan
