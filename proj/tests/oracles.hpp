#pragma once

// Independent reference implementations used by the unit tests and the
// acceptance binary. Deliberately naive: direct loops, no shared helpers with
// the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dentgan/image.hpp"
#include "dentgan/label_codec.hpp"
#include "dentgan/metrics.hpp"
#include "dentgan/rng.hpp"
#include "dentgan/tensor.hpp"

namespace oracle {

using dentgan::Tensor;

// Direct-summation strided convolution, weights [out][in][k][k].
template <typename T>
Tensor<T> conv(const Tensor<T>& x, const std::vector<T>& w, const std::vector<T>& b, std::size_t out_c,
               std::size_t k, std::size_t s, std::size_t p) {
    const long H = long(x.shape.h), W = long(x.shape.w);
    const std::size_t oh = (x.shape.h + 2 * p - k) / s + 1, ow = (x.shape.w + 2 * p - k) / s + 1;
    Tensor<T> y(x.n, {out_c, oh, ow});
    for (std::size_t n = 0; n < x.n; ++n)
        for (std::size_t o = 0; o < out_c; ++o)
            for (std::size_t oy = 0; oy < oh; ++oy)
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    double acc = b.empty() ? 0.0 : double(b[o]);
                    for (std::size_t c = 0; c < x.shape.c; ++c)
                        for (std::size_t ky = 0; ky < k; ++ky)
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                const long iy = long(oy * s + ky) - long(p), ix = long(ox * s + kx) - long(p);
                                if (iy < 0 || ix < 0 || iy >= H || ix >= W) continue;
                                acc += double(w[((o * x.shape.c + c) * k + ky) * k + kx]) *
                                       double(x.at(n, c, std::size_t(iy), std::size_t(ix)));
                            }
                    y.at(n, o, oy, ox) = T(acc);
                }
    return y;
}

// Scatter form of the transposed convolution, weights [in][out][k][k].
template <typename T>
Tensor<T> deconv(const Tensor<T>& x, const std::vector<T>& w, const std::vector<T>& b, std::size_t out_c,
                 std::size_t k, std::size_t s, std::size_t p, std::size_t op) {
    const std::size_t oh = (x.shape.h - 1) * s + k + op - 2 * p, ow = (x.shape.w - 1) * s + k + op - 2 * p;
    std::vector<double> acc(x.n * out_c * oh * ow, 0.0);
    for (std::size_t n = 0; n < x.n; ++n)
        for (std::size_t c = 0; c < x.shape.c; ++c)
            for (std::size_t iy = 0; iy < x.shape.h; ++iy)
                for (std::size_t ix = 0; ix < x.shape.w; ++ix)
                    for (std::size_t o = 0; o < out_c; ++o)
                        for (std::size_t ky = 0; ky < k; ++ky)
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                const long yy = long(iy * s + ky) - long(p), xx = long(ix * s + kx) - long(p);
                                if (yy < 0 || xx < 0 || yy >= long(oh) || xx >= long(ow)) continue;
                                acc[((n * out_c + o) * oh + std::size_t(yy)) * ow + std::size_t(xx)] +=
                                    double(w[((c * out_c + o) * k + ky) * k + kx]) * double(x.at(n, c, iy, ix));
                            }
    Tensor<T> y(x.n, {out_c, oh, ow});
    for (std::size_t n = 0; n < x.n; ++n)
        for (std::size_t o = 0; o < out_c; ++o)
            for (std::size_t q = 0; q < oh * ow; ++q)
                y.data[(n * out_c + o) * oh * ow + q] =
                    T(acc[(n * out_c + o) * oh * ow + q] + (b.empty() ? 0.0 : double(b[o])));
    return y;
}

// Central finite difference of f with respect to every entry of `v`.
inline std::vector<double> numeric_grad(std::vector<double>& v, const std::function<double()>& f, double h = 1e-3) {
    std::vector<double> g(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double keep = v[i];
        v[i] = keep + h;
        const double up = f();
        v[i] = keep - h;
        const double down = f();
        v[i] = keep;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

inline double rel_error(double a, double b) {
    const double den = std::max({std::abs(a), std::abs(b), 1e-6});
    return std::abs(a - b) / den;
}

inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, rel_error(a[i], b[i]));
    return m;
}

inline std::vector<double> random_vec(dentgan::Rng& rng, std::size_t n, double lo = -1, double hi = 1) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Confusion counts by direct comparison of every pixel.
struct Counts {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Counts count_pixels(const dentgan::IndexMask& pred, const dentgan::IndexMask& gt, std::uint8_t c) {
    Counts k;
    for (std::size_t y = 0; y < gt.height; ++y)
        for (std::size_t x = 0; x < gt.width; ++x) {
            const bool p = pred.at(x, y) == c, g = gt.at(x, y) == c;
            if (p && g) ++k.tp;
            else if (p) ++k.fp;
            else if (g) ++k.fn;
            else ++k.tn;
        }
    return k;
}

inline std::optional<double> div(std::uint64_t a, std::uint64_t b) {
    return b ? std::optional<double>(double(a) / double(b)) : std::nullopt;
}

// Nearest palette color by exhaustive search (first minimum wins).
inline std::uint8_t nearest_class(const dentgan::ClassPalette& pal, int r, int g, int b) {
    std::uint8_t best = 0;
    long best_d = -1;
    for (std::size_t i = 0; i < pal.size(); ++i) {
        const long dr = r - pal[i].rgb[0], dg = g - pal[i].rgb[1], db = b - pal[i].rgb[2];
        const long d = dr * dr + dg * dg + db * db;
        if (best_d < 0 || d < best_d) {
            best_d = d;
            best = std::uint8_t(i);
        }
    }
    return best;
}

inline dentgan::IndexMask random_mask(dentgan::Rng& rng, std::size_t w, std::size_t h, int classes = 8) {
    dentgan::IndexMask m(w, h);
    for (auto& v : m.data) v = std::uint8_t(rng.uniform_int(0, classes - 1));
    return m;
}

}  // namespace oracle
