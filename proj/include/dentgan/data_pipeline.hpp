#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "image.hpp"
#include "label_codec.hpp"
#include "parallel.hpp"
#include "png_io.hpp"
#include "rng.hpp"

namespace dentgan {

/// Augmentation families and their ranges. The defaults expand 80 pairs
/// into 28 800.
struct AugmentSpec {
    std::vector<double> rotation_degrees{0, 5, -5, 10, -10, 90, 180, 270};
    bool allow_hflip = true;
    bool allow_vflip = true;
    int max_translate = 16;
    double intensity_delta = 0.1;  // on the [-1,1] scale
    int expansion_factor = 360;

    void validate(std::size_t image_size) const {
        if (expansion_factor < 1) throw InvalidSpec("expansion_factor must be >= 1");
        if (!(intensity_delta >= 0.0 && intensity_delta <= 1.0)) throw InvalidSpec("intensity_delta outside [0,1]");
        if (max_translate < 0 || (image_size > 0 && std::size_t(max_translate) >= image_size)) {
            throw InvalidSpec("max_translate must lie in [0, image size)");
        }
    }

    /// Spec that leaves every pair unchanged.
    static AugmentSpec identity() {
        AugmentSpec s;
        s.rotation_degrees = {0};
        s.allow_hflip = s.allow_vflip = false;
        s.max_translate = 0;
        s.intensity_delta = 0;
        s.expansion_factor = 1;
        return s;
    }
};

/// One concrete augmentation. Applied as flip, then clockwise rotation about
/// the image center, then translation.
struct Transform {
    double degrees = 0;
    bool hflip = false;
    bool vflip = false;
    int tx = 0;
    int ty = 0;
    double intensity = 0;  // normalized-scale shift, radiograph only
};

struct Dataset {
    std::vector<SamplePair> pairs;
    std::size_t input_size = 0;
};

// ---------------------------------------------------------------------------
// Disk I/O

inline std::vector<SamplePair> load_pairs(const std::filesystem::path& image_dir, const std::filesystem::path& mask_dir,
                                          const ClassPalette& palette) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(image_dir)) throw IoError("not a directory: " + image_dir.string());
    if (!fs::is_directory(mask_dir)) throw IoError("not a directory: " + mask_dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(image_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    std::vector<SamplePair> out;
    out.reserve(files.size());
    for (const auto& f : files) {
        const auto name = f.filename().string();
        const auto mpath = mask_dir / f.filename();
        if (!fs::exists(mpath)) throw MissingMask(name);
        SamplePair p;
        p.id = f.stem().string();
        p.radiograph = png::read_gray(f);
        p.mask = encode_mask(png::read_rgb(mpath), palette, 0);
        if (p.radiograph.width != p.mask.width || p.radiograph.height != p.mask.height) throw DimensionMismatch(name);
        out.push_back(std::move(p));
    }
    return out;
}

/// Writes `<dir>/images/<id>.png` and `<dir>/masks/<id>.png`.
inline void write_pairs(const std::filesystem::path& dir, const std::vector<SamplePair>& pairs,
                        const ClassPalette& palette) {
    std::filesystem::create_directories(dir / "images");
    std::filesystem::create_directories(dir / "masks");
    for (const auto& p : pairs) {
        png::write(dir / "images" / (p.id + ".png"), p.radiograph);
        png::write(dir / "masks" / (p.id + ".png"), decode_mask(p.mask, palette));
    }
}

// ---------------------------------------------------------------------------
// Resampling

namespace detail {

inline std::uint8_t round_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)); }

/// Bilinear sample at continuous pixel-index coords; taps outside the image
/// read `fill` when given, otherwise clamp to the border.
inline double bilinear(const GrayImage& img, double sx, double sy, std::optional<double> fill) {
    const double fx0 = std::floor(sx), fy0 = std::floor(sy);
    const double fx = sx - fx0, fy = sy - fy0;
    const long x0 = static_cast<long>(fx0), y0 = static_cast<long>(fy0);
    const long w = static_cast<long>(img.width), h = static_cast<long>(img.height);
    auto tap = [&](long x, long y) -> double {
        if (x < 0 || y < 0 || x >= w || y >= h) {
            if (fill) return *fill;
            x = std::clamp(x, 0L, w - 1);
            y = std::clamp(y, 0L, h - 1);
        }
        return img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
    };
    double v = (1 - fx) * (1 - fy) * tap(x0, y0);
    if (fx != 0) v += fx * (1 - fy) * tap(x0 + 1, y0);
    if (fy != 0) v += (1 - fx) * fy * tap(x0, y0 + 1);
    if (fx != 0 && fy != 0) v += fx * fy * tap(x0 + 1, y0 + 1);
    return v;
}

}  // namespace detail

/// Bilinear (half-pixel centers, clamped borders).
inline GrayImage resize_bilinear(const GrayImage& src, std::size_t w, std::size_t h) {
    GrayImage out(w, h);
    const double scx = double(src.width) / double(w), scy = double(src.height) / double(h);
    for (std::size_t y = 0; y < h; ++y) {
        const double sy = std::clamp((y + 0.5) * scy - 0.5, 0.0, double(src.height - 1));
        for (std::size_t x = 0; x < w; ++x) {
            const double sx = std::clamp((x + 0.5) * scx - 0.5, 0.0, double(src.width - 1));
            out.at(x, y) = detail::round_byte(detail::bilinear(src, sx, sy, std::nullopt));
        }
    }
    return out;
}

/// Nearest-neighbour sampling at output pixel centers.
inline IndexMask resize_nearest(const IndexMask& src, std::size_t w, std::size_t h) {
    IndexMask out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        const auto sy = std::min(src.height - 1, static_cast<std::size_t>((y + 0.5) * src.height / h));
        for (std::size_t x = 0; x < w; ++x) {
            const auto sx = std::min(src.width - 1, static_cast<std::size_t>((x + 0.5) * src.width / w));
            out.at(x, y) = src.at(sx, sy);
        }
    }
    return out;
}

inline SamplePair resize_pair(const SamplePair& pair, std::size_t size) {
    if (size < 32) throw InvalidSpec("resize target must be >= 32");
    check_pair(pair);
    if (pair.mask.width == size && pair.mask.height == size) return pair;
    return {pair.id, resize_bilinear(pair.radiograph, size, size), resize_nearest(pair.mask, size, size)};
}

// ---------------------------------------------------------------------------
// Augmentation

/// Draws one transform. Every field consumes the stream whether or not the
/// family is enabled, so enabling one family never reshuffles another.
inline Transform sample_transform(const AugmentSpec& spec, Rng& rng) {
    Transform t;
    const auto n_angles = static_cast<std::int64_t>(spec.rotation_degrees.size());
    const auto ai = rng.uniform_int(0, std::max<std::int64_t>(n_angles, 1) - 1);
    t.degrees = n_angles > 0 ? spec.rotation_degrees[static_cast<std::size_t>(ai)] : 0.0;
    t.hflip = rng.bernoulli(0.5) && spec.allow_hflip;
    t.vflip = rng.bernoulli(0.5) && spec.allow_vflip;
    t.tx = static_cast<int>(rng.uniform_int(-spec.max_translate, spec.max_translate));
    t.ty = static_cast<int>(rng.uniform_int(-spec.max_translate, spec.max_translate));
    t.intensity = rng.uniform(-spec.intensity_delta, spec.intensity_delta);
    return t;
}

namespace detail {

/// (cos, sin) with exact values at multiples of 90 degrees.
inline std::pair<double, double> exact_cos_sin(double degrees) {
    const double m = std::fmod(std::fmod(degrees, 360.0) + 360.0, 360.0);
    if (m == 0.0) return {1.0, 0.0};
    if (m == 90.0) return {0.0, 1.0};
    if (m == 180.0) return {-1.0, 0.0};
    if (m == 270.0) return {0.0, -1.0};
    const double r = degrees * std::numbers::pi / 180.0;
    return {std::cos(r), std::sin(r)};
}

/// Source coordinate (continuous, pixel edges at integers) for an output
/// pixel center.
struct InverseMap {
    double cx, cy, c, s;
    const Transform& t;
    std::pair<double, double> operator()(std::size_t x, std::size_t y) const {
        const double up = x + 0.5 - cx - t.tx;
        const double vp = y + 0.5 - cy - t.ty;
        double u = up * c + vp * s;
        double v = -up * s + vp * c;
        if (t.hflip) u = -u;
        if (t.vflip) v = -v;
        return {u + cx, v + cy};
    }
};

}  // namespace detail

/// Applies one geometric + intensity transform to both halves of a pair.
inline SamplePair apply_transform(const SamplePair& pair, const Transform& t) {
    check_pair(pair);
    const std::size_t w = pair.mask.width, h = pair.mask.height;
    const auto [c, s] = detail::exact_cos_sin(t.degrees);
    const detail::InverseMap map{w / 2.0, h / 2.0, c, s, t};
    SamplePair out{pair.id, GrayImage(w, h), IndexMask(w, h, kBackground)};
    const double shift = t.intensity * 127.5;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const auto [sx, sy] = map(x, y);
            const double fx = std::floor(sx), fy = std::floor(sy);
            if (fx >= 0 && fy >= 0 && fx < double(w) && fy < double(h)) {
                out.mask.at(x, y) = pair.mask.at(static_cast<std::size_t>(fx), static_cast<std::size_t>(fy));
            }
            const double v = detail::bilinear(pair.radiograph, sx - 0.5, sy - 0.5, 0.0);
            out.radiograph.at(x, y) = detail::round_byte(v + shift);
        }
    }
    return out;
}

inline SamplePair augment(const SamplePair& pair, const AugmentSpec& spec, std::uint64_t seed) {
    Rng rng(derive_seed({hash_string(pair.id), seed}));
    return apply_transform(pair, sample_transform(spec, rng));
}

inline Dataset expand_dataset(const std::vector<SamplePair>& pairs, const AugmentSpec& spec, std::uint64_t seed) {
    Dataset ds;
    if (pairs.empty()) {
        spec.validate(0);
        return ds;
    }
    for (const auto& p : pairs) {
        check_pair(p);
        if (p.mask.width != pairs.front().mask.width || p.mask.height != pairs.front().mask.height) {
            throw DimensionMismatch(p.id + ": pairs must share dimensions before expansion");
        }
    }
    ds.input_size = pairs.front().mask.width;
    spec.validate(ds.input_size);
    const auto factor = static_cast<std::size_t>(spec.expansion_factor);
    ds.pairs.resize(pairs.size() * factor);
    parallel_for(ds.pairs.size(), [&](std::size_t j) {
        const std::size_t i = j / factor, k = j % factor;
        if (k == 0) {
            ds.pairs[j] = pairs[i];
        } else {
            ds.pairs[j] = augment(pairs[i], spec, derive_seed({seed, i, k}));
            ds.pairs[j].id = pairs[i].id + "-aug" + std::to_string(k);
        }
    });
    return ds;
}

/// Resize every pair and wrap them without augmentation.
inline Dataset prepare_dataset(const std::vector<SamplePair>& pairs, std::size_t size) {
    Dataset ds;
    ds.input_size = size;
    ds.pairs.reserve(pairs.size());
    for (const auto& p : pairs) ds.pairs.push_back(resize_pair(p, size));
    return ds;
}

}  // namespace dentgan
