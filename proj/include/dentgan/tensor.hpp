#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace dentgan {

/// Per-sample shape (channels, height, width).
struct Shape {
    std::size_t c = 0, h = 0, w = 0;
    std::size_t size() const noexcept { return c * h * w; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
    return std::to_string(s.h) + "x" + std::to_string(s.w) + "x" + std::to_string(s.c);
}

/// Dense NCHW batch.
template <typename T>
struct Tensor {
    std::size_t n = 0;
    Shape shape;
    std::vector<T> data;

    Tensor() = default;
    Tensor(std::size_t batch, Shape s, T fill = T{}) : n(batch), shape(s), data(batch * s.size(), fill) {}

    std::size_t size() const noexcept { return data.size(); }
    std::size_t sample_size() const noexcept { return shape.size(); }
    std::size_t plane() const noexcept { return shape.h * shape.w; }

    T& at(std::size_t i, std::size_t c, std::size_t y, std::size_t x) {
        return data[((i * shape.c + c) * shape.h + y) * shape.w + x];
    }
    const T& at(std::size_t i, std::size_t c, std::size_t y, std::size_t x) const {
        return data[((i * shape.c + c) * shape.h + y) * shape.w + x];
    }

    std::span<T> sample(std::size_t i) { return {data.data() + i * sample_size(), sample_size()}; }
    std::span<const T> sample(std::size_t i) const { return {data.data() + i * sample_size(), sample_size()}; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
    Tensor<To> out(t.n, t.shape);
    std::transform(t.data.begin(), t.data.end(), out.data.begin(), [](From v) { return static_cast<To>(v); });
    return out;
}

/// Channel-wise concatenation [a, b].
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.n != b.n || a.shape.h != b.shape.h || a.shape.w != b.shape.w) {
        throw ShapeMismatch("concat " + to_string(a.shape) + " with " + to_string(b.shape));
    }
    Tensor<T> out(a.n, {a.shape.c + b.shape.c, a.shape.h, a.shape.w});
    for (std::size_t i = 0; i < a.n; ++i) {
        auto dst = out.sample(i);
        std::copy(a.sample(i).begin(), a.sample(i).end(), dst.begin());
        std::copy(b.sample(i).begin(), b.sample(i).end(), dst.begin() + static_cast<std::ptrdiff_t>(a.sample_size()));
    }
    return out;
}

/// Channels [first, first + count) of t.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& t, std::size_t first, std::size_t count) {
    Tensor<T> out(t.n, {count, t.shape.h, t.shape.w});
    const std::size_t plane = t.plane();
    for (std::size_t i = 0; i < t.n; ++i) {
        const auto src = t.sample(i).subspan(first * plane, count * plane);
        std::copy(src.begin(), src.end(), out.sample(i).begin());
    }
    return out;
}

}  // namespace dentgan
