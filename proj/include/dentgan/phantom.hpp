#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "image.hpp"
#include "label_codec.hpp"
#include "rng.hpp"

namespace dentgan {

struct PhantomSpec {
    std::size_t image_size = 256;
    std::pair<int, int> teeth_count_range{2, 4};
    // Per-tooth occurrence probabilities for the optional classes.
    double p_caries = 0.5;
    double p_crown = 0.25;
    double p_restoration = 0.3;
    double p_root_canal = 0.3;
    double noise_sigma = 10.0;
    int blur_radius = 1;

    void validate() const {
        for (double p : {p_caries, p_crown, p_restoration, p_root_canal}) {
            if (!(p >= 0.0 && p <= 1.0)) throw InvalidSpec("class probability outside [0,1]");
        }
        if (image_size < 32) throw InvalidSpec("image_size must be >= 32");
        if (teeth_count_range.first < 1 || teeth_count_range.second < teeth_count_range.first) {
            throw InvalidSpec("teeth_count_range must satisfy 1 <= min <= max");
        }
        if (!(noise_sigma >= 0.0) || blur_radius < 0) throw InvalidSpec("negative noise_sigma or blur_radius");
    }
};

namespace shapes {

/// Points within `r` of the vertical segment x = cx, y in [y0, y1].
struct Capsule {
    double cx, y0, y1, r;
    bool contains(double x, double y) const {
        const double dy = y - std::clamp(y, y0, y1);
        const double dx = x - cx;
        return dx * dx + dy * dy <= r * r;
    }
    /// Sufficient containment test for two vertical capsules (exact when
    /// they share an axis).
    bool contains(const Capsule& o) const {
        return o.y0 >= y0 && o.y1 <= y1 && std::abs(o.cx - cx) + o.r <= r;
    }
};

struct Rect {
    double x0, y0, x1, y1;
    bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

struct Circle {
    double cx, cy, r;
    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        return dx * dx + dy * dy <= r * r;
    }
};

}  // namespace shapes

/// Geometry of one generated tooth, exposed so tests can check nesting
/// analytically instead of by pixels alone.
struct ToothShapes {
    shapes::Capsule outer;   // enamel shell outline
    shapes::Capsule dentin;
    shapes::Capsule pulp;
    bool crown_up = true;    // crown end toward smaller y
    std::optional<double> crown_limit;  // crown covers outer on the crown side of this y
    std::optional<shapes::Circle> restoration;
    std::optional<shapes::Circle> caries;
    std::optional<shapes::Rect> root_canal;
};

struct PhantomResult {
    SamplePair pair;
    std::vector<ToothShapes> teeth;
};

/// Mean intensity per class before blur and noise. Background darkest,
/// restorative materials brightest.
inline constexpr std::array<double, kNumClasses> kClassIntensity = {35, 120, 215, 160, 95, 232, 250, 185};

namespace detail {

inline ToothShapes make_tooth(Rng& rng, double cx, double slot, double size, const PhantomSpec& spec) {
    ToothShapes t;
    const double r = slot * rng.uniform(0.28, 0.36);
    const double top = size * rng.uniform(0.1, 0.2);
    const double bottom = size * rng.uniform(0.8, 0.9);
    const double enamel = r * rng.uniform(0.22, 0.3);
    t.crown_up = rng.bernoulli(0.5);
    t.outer = {cx, top + r, bottom - r, r};
    t.dentin = {cx, top + r, bottom - r, r - enamel};

    const double len = t.outer.y1 - t.outer.y0;
    // Pulp chamber sits toward the crown end, canal runs toward the root end.
    const double pulp_near = 0.15 * len, pulp_far = 0.7 * len;
    if (t.crown_up) {
        t.pulp = {cx, t.outer.y0 + pulp_near, t.outer.y0 + pulp_far, 0.4 * r};
    } else {
        t.pulp = {cx, t.outer.y1 - pulp_far, t.outer.y1 - pulp_near, 0.4 * r};
    }

    // Each optional feature draws from the stream unconditionally so the
    // stream layout does not depend on the probabilities.
    const bool has_crown = rng.bernoulli(spec.p_crown);
    const double crown_depth = r * rng.uniform(0.9, 1.3);
    const bool has_restoration = rng.bernoulli(spec.p_restoration);
    const double resto_dx = r * rng.uniform(-0.3, 0.3);
    const bool has_caries = rng.bernoulli(spec.p_caries);
    const double caries_side = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const double caries_pos = rng.uniform(0.0, 0.45);
    const bool has_canal = rng.bernoulli(spec.p_root_canal);

    const double crown_end = t.crown_up ? top : bottom;
    const double inward = t.crown_up ? 1.0 : -1.0;
    if (has_crown) t.crown_limit = crown_end + inward * crown_depth;
    if (has_restoration) t.restoration = shapes::Circle{cx + resto_dx, crown_end + inward * 0.6 * r, 0.45 * r};
    if (has_caries) {
        const double cy = t.crown_up ? t.outer.y0 + caries_pos * len : t.outer.y1 - caries_pos * len;
        t.caries = shapes::Circle{cx + caries_side * (r - 0.5 * enamel), cy, 0.35 * r};
    }
    if (has_canal) {
        const double mid = 0.5 * (t.outer.y0 + t.outer.y1);
        const double hw = 0.15 * r;
        if (t.crown_up) {
            t.root_canal = shapes::Rect{cx - hw, mid, cx + hw, t.outer.y1};
        } else {
            t.root_canal = shapes::Rect{cx - hw, t.outer.y0, cx + hw, mid};
        }
    }
    return t;
}

inline std::uint8_t classify(const ToothShapes& t, double x, double y, std::uint8_t current) {
    if (!t.outer.contains(x, y)) return current;
    std::uint8_t c = kEnamel;
    if (t.dentin.contains(x, y)) c = kDentin;
    if (t.pulp.contains(x, y)) c = kPulp;
    if (t.root_canal && t.root_canal->contains(x, y)) c = kRootCanal;
    if (t.crown_limit && (t.crown_up ? y <= *t.crown_limit : y >= *t.crown_limit)) c = kCrown;
    if (t.restoration && t.restoration->contains(x, y)) c = kRestoration;
    if (t.caries && t.caries->contains(x, y) && (c == kEnamel || c == kDentin)) c = kCaries;
    return c;
}

/// Separable box blur with clamped borders.
inline std::vector<double> box_blur(const std::vector<double>& src, std::size_t n, int radius) {
    if (radius <= 0) return src;
    std::vector<double> tmp(src.size()), out(src.size());
    const auto idx = [n](long v) { return static_cast<std::size_t>(std::clamp<long>(v, 0, long(n) - 1)); };
    const double norm = 1.0 / (2 * radius + 1);
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            double s = 0;
            for (int k = -radius; k <= radius; ++k) s += src[y * n + idx(long(x) + k)];
            tmp[y * n + x] = s * norm;
        }
    }
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            double s = 0;
            for (int k = -radius; k <= radius; ++k) s += tmp[idx(long(y) + k) * n + x];
            out[y * n + x] = s * norm;
        }
    }
    return out;
}

}  // namespace detail

/// Phantom plus the analytic shapes it was rasterized from.
inline PhantomResult generate_phantom_detailed(std::uint64_t seed, const PhantomSpec& spec) {
    spec.validate();
    Rng rng(seed);
    const std::size_t n = spec.image_size;
    const double size = static_cast<double>(n);
    const int teeth = static_cast<int>(rng.uniform_int(spec.teeth_count_range.first, spec.teeth_count_range.second));
    const double slot = size / teeth;

    PhantomResult res;
    for (int i = 0; i < teeth; ++i) {
        const double cx = (i + 0.5) * slot + slot * rng.uniform(-0.06, 0.06);
        res.teeth.push_back(detail::make_tooth(rng, cx, slot, size, spec));
    }

    IndexMask mask(n, n, kBackground);
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            std::uint8_t c = kBackground;
            for (const auto& t : res.teeth) c = detail::classify(t, x + 0.5, y + 0.5, c);
            mask.at(x, y) = c;
        }
    }

    std::vector<double> base(n * n);
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = kClassIntensity[mask.data[i]];
    base = detail::box_blur(base, n, spec.blur_radius);
    GrayImage radiograph(n, n);
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double v = base[i] + spec.noise_sigma * rng.normal();
        radiograph.data[i] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }

    res.pair = SamplePair{"phantom-" + std::to_string(seed), std::move(radiograph), std::move(mask)};
    return res;
}

inline SamplePair generate_phantom(std::uint64_t seed, const PhantomSpec& spec) {
    return generate_phantom_detailed(seed, spec).pair;
}

/// Seed of element `index` in the dataset stream for `seed`.
inline std::uint64_t phantom_seed(std::uint64_t seed, std::size_t index) { return derive_seed({seed, index}); }

inline std::vector<SamplePair> generate_dataset(std::uint64_t seed, const PhantomSpec& spec, std::size_t n) {
    spec.validate();
    if (n < 1) throw InvalidSpec("dataset size must be >= 1");
    std::vector<SamplePair> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto p = generate_phantom(phantom_seed(seed, i), spec);
        p.id = "phantom-" + std::to_string(seed) + "-" + std::to_string(i);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace dentgan
