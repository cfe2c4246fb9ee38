#pragma once

// Forward and backward kernels for the primitive layers. Everything is
// templated on the scalar so gradient checks run in double while training
// runs in float.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "parallel.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace dentgan::kernels {

// ---------------------------------------------------------------------------
// GEMM building blocks (row-major, accumulate into C). Rows of C are split
// across workers, so each output element has one fixed summation order.

/// C[M,N] += A[M,K] * B[K,N]
template <typename T>
void gemm_nn(std::size_t M, std::size_t N, std::size_t K, const T* A, const T* B, T* C) {
    parallel_for(M, [&](std::size_t m) {
        T* c = C + m * N;
        for (std::size_t k = 0; k < K; ++k) {
            const T a = A[m * K + k];
            const T* b = B + k * N;
            for (std::size_t j = 0; j < N; ++j) c[j] += a * b[j];
        }
    });
}

/// C[M,N] += A[K,M]^T * B[K,N]
template <typename T>
void gemm_tn(std::size_t M, std::size_t N, std::size_t K, const T* A, const T* B, T* C) {
    parallel_for(M, [&](std::size_t m) {
        T* c = C + m * N;
        for (std::size_t k = 0; k < K; ++k) {
            const T a = A[k * M + m];
            const T* b = B + k * N;
            for (std::size_t j = 0; j < N; ++j) c[j] += a * b[j];
        }
    });
}

/// C[M,N] += A[M,K] * B[N,K]^T
template <typename T>
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const T* A, const T* B, T* C) {
    parallel_for(M, [&](std::size_t m) {
        const T* a = A + m * K;
        for (std::size_t j = 0; j < N; ++j) {
            const T* b = B + j * K;
            T s = 0;
            for (std::size_t k = 0; k < K; ++k) s += a[k] * b[k];
            C[m * N + j] += s;
        }
    });
}

// ---------------------------------------------------------------------------
// Strided window geometry shared by conv and deconv. The "large" side is the
// conv input / deconv output; the "small" side is the conv output / deconv
// input. Large pixel (y, x) is touched by small (ys, xs) and tap (ky, kx)
// when y = ys * stride + ky - pad.

struct Window {
    std::size_t kernel = 5, stride = 2, pad = 2;
    std::size_t large_h = 0, large_w = 0;
    std::size_t small_h = 0, small_w = 0;
};

/// Conv output size for input n.
inline std::size_t conv_out(std::size_t n, std::size_t k, std::size_t s, std::size_t p) {
    return (n + 2 * p - k) / s + 1;
}

/// Transposed-conv output size for input n.
inline std::size_t deconv_out(std::size_t n, std::size_t k, std::size_t s, std::size_t p, std::size_t op) {
    return (n - 1) * s + k + op - 2 * p;
}

/// col[(c, ky, kx), (ys, xs)] = large[c, y, x]
template <typename T>
void im2col(std::span<const T> large, std::size_t channels, const Window& g, T* col) {
    const std::size_t kk = g.kernel * g.kernel, P = g.small_h * g.small_w;
    parallel_for(channels * kk, [&](std::size_t row) {
        const std::size_t c = row / kk, ky = (row % kk) / g.kernel, kx = row % g.kernel;
        T* dst = col + row * P;
        const T* src = large.data() + c * g.large_h * g.large_w;
        for (std::size_t ys = 0; ys < g.small_h; ++ys) {
            const long y = long(ys * g.stride + ky) - long(g.pad);
            for (std::size_t xs = 0; xs < g.small_w; ++xs) {
                const long x = long(xs * g.stride + kx) - long(g.pad);
                const bool inside = y >= 0 && x >= 0 && y < long(g.large_h) && x < long(g.large_w);
                dst[ys * g.small_w + xs] = inside ? src[std::size_t(y) * g.large_w + std::size_t(x)] : T{0};
            }
        }
    });
}

/// Adjoint of im2col: large[c, y, x] += col[(c, ky, kx), (ys, xs)]
template <typename T>
void col2im(const T* col, std::size_t channels, const Window& g, std::span<T> large) {
    const std::size_t kk = g.kernel * g.kernel, P = g.small_h * g.small_w;
    // Channels are independent; within a channel the tap order is fixed.
    parallel_for(channels, [&](std::size_t c) {
        T* dst = large.data() + c * g.large_h * g.large_w;
        for (std::size_t t = 0; t < kk; ++t) {
            const std::size_t ky = t / g.kernel, kx = t % g.kernel;
            const T* src = col + (c * kk + t) * P;
            for (std::size_t ys = 0; ys < g.small_h; ++ys) {
                const long y = long(ys * g.stride + ky) - long(g.pad);
                if (y < 0 || y >= long(g.large_h)) continue;
                for (std::size_t xs = 0; xs < g.small_w; ++xs) {
                    const long x = long(xs * g.stride + kx) - long(g.pad);
                    if (x < 0 || x >= long(g.large_w)) continue;
                    dst[std::size_t(y) * g.large_w + std::size_t(x)] += src[ys * g.small_w + xs];
                }
            }
        }
    });
}

// ---------------------------------------------------------------------------
// Convolution. Weight layout [out, in, k, k].

template <typename T>
Tensor<T> conv_forward(const Tensor<T>& x, std::span<const T> weight, std::span<const T> bias, std::size_t out_c,
                       std::size_t k, std::size_t s, std::size_t p) {
    const Window g{k, s, p, x.shape.h, x.shape.w, conv_out(x.shape.h, k, s, p), conv_out(x.shape.w, k, s, p)};
    Tensor<T> y(x.n, {out_c, g.small_h, g.small_w});
    const std::size_t K = x.shape.c * k * k, P = g.small_h * g.small_w;
    std::vector<T> col(K * P);
    for (std::size_t i = 0; i < x.n; ++i) {
        im2col<T>(x.sample(i), x.shape.c, g, col.data());
        T* out = y.sample(i).data();
        for (std::size_t o = 0; o < out_c; ++o) std::fill(out + o * P, out + (o + 1) * P, bias.empty() ? T{0} : bias[o]);
        gemm_nn(out_c, P, K, weight.data(), col.data(), out);
    }
    return y;
}

/// Returns dx; accumulates into dweight / dbias when they are non-empty.
template <typename T>
Tensor<T> conv_backward(const Tensor<T>& x, const Tensor<T>& dy, std::span<const T> weight, std::span<T> dweight,
                        std::span<T> dbias, std::size_t k, std::size_t s, std::size_t p) {
    const Window g{k, s, p, x.shape.h, x.shape.w, dy.shape.h, dy.shape.w};
    const std::size_t out_c = dy.shape.c, K = x.shape.c * k * k, P = g.small_h * g.small_w;
    Tensor<T> dx(x.n, x.shape);
    std::vector<T> col(K * P);
    for (std::size_t i = 0; i < x.n; ++i) {
        const T* g_out = dy.sample(i).data();
        if (!dweight.empty()) {
            im2col<T>(x.sample(i), x.shape.c, g, col.data());
            gemm_nt(out_c, K, P, g_out, col.data(), dweight.data());
        }
        if (!dbias.empty()) {
            for (std::size_t o = 0; o < out_c; ++o) {
                T acc = 0;
                for (std::size_t q = 0; q < P; ++q) acc += g_out[o * P + q];
                dbias[o] += acc;
            }
        }
        std::fill(col.begin(), col.end(), T{0});
        gemm_tn(K, P, out_c, weight.data(), g_out, col.data());
        col2im<T>(col.data(), x.shape.c, g, dx.sample(i));
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Transposed convolution: the adjoint of conv with the same (k, s, p), plus
// `op` extra rows/cols at the far edge. Weight layout [in, out, k, k].

template <typename T>
Tensor<T> deconv_forward(const Tensor<T>& x, std::span<const T> weight, std::span<const T> bias, std::size_t out_c,
                         std::size_t k, std::size_t s, std::size_t p, std::size_t op) {
    const Window g{k, s, p, deconv_out(x.shape.h, k, s, p, op), deconv_out(x.shape.w, k, s, p, op), x.shape.h,
                   x.shape.w};
    Tensor<T> y(x.n, {out_c, g.large_h, g.large_w});
    const std::size_t K = out_c * k * k, P = g.small_h * g.small_w, plane = g.large_h * g.large_w;
    std::vector<T> col(K * P);
    for (std::size_t i = 0; i < x.n; ++i) {
        std::fill(col.begin(), col.end(), T{0});
        gemm_tn(K, P, x.shape.c, weight.data(), x.sample(i).data(), col.data());
        auto out = y.sample(i);
        for (std::size_t o = 0; o < out_c; ++o) {
            std::fill(out.begin() + o * plane, out.begin() + (o + 1) * plane, bias.empty() ? T{0} : bias[o]);
        }
        col2im<T>(col.data(), out_c, g, out);
    }
    return y;
}

template <typename T>
Tensor<T> deconv_backward(const Tensor<T>& x, const Tensor<T>& dy, std::span<const T> weight, std::span<T> dweight,
                          std::span<T> dbias, std::size_t k, std::size_t s, std::size_t p) {
    const Window g{k, s, p, dy.shape.h, dy.shape.w, x.shape.h, x.shape.w};
    const std::size_t out_c = dy.shape.c, K = out_c * k * k, P = g.small_h * g.small_w;
    const std::size_t plane = dy.plane();
    Tensor<T> dx(x.n, x.shape);
    std::vector<T> col(K * P);
    for (std::size_t i = 0; i < x.n; ++i) {
        im2col<T>(dy.sample(i), out_c, g, col.data());
        gemm_nn(x.shape.c, P, K, weight.data(), col.data(), dx.sample(i).data());
        if (!dweight.empty()) gemm_nt(x.shape.c, K, P, x.sample(i).data(), col.data(), dweight.data());
        if (!dbias.empty()) {
            const T* g_out = dy.sample(i).data();
            for (std::size_t o = 0; o < out_c; ++o) {
                T acc = 0;
                for (std::size_t q = 0; q < plane; ++q) acc += g_out[o * plane + q];
                dbias[o] += acc;
            }
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Fully connected over the flattened sample. Weight layout [out, in].

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, std::span<const T> weight, std::span<const T> bias, std::size_t out) {
    const std::size_t in = x.sample_size();
    Tensor<T> y(x.n, {out, 1, 1});
    for (std::size_t i = 0; i < x.n; ++i) {
        std::copy(bias.begin(), bias.end(), y.sample(i).begin());
        gemm_nt(out, 1, in, weight.data(), x.sample(i).data(), y.sample(i).data());
    }
    return y;
}

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& x, const Tensor<T>& dy, std::span<const T> weight, std::span<T> dweight,
                         std::span<T> dbias) {
    const std::size_t in = x.sample_size(), out = dy.shape.c;
    Tensor<T> dx(x.n, x.shape);
    for (std::size_t i = 0; i < x.n; ++i) {
        const T* g = dy.sample(i).data();
        if (!dweight.empty()) gemm_nn(out, in, 1, g, x.sample(i).data(), dweight.data());
        if (!dbias.empty()) {
            for (std::size_t o = 0; o < out; ++o) dbias[o] += g[o];
        }
        gemm_tn(in, 1, out, weight.data(), g, dx.sample(i).data());
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Per-pixel affine map across channels (a 1x1 convolution). Weight [out, in].

template <typename T>
Tensor<T> pointwise_forward(const Tensor<T>& x, std::span<const T> weight, std::span<const T> bias, std::size_t out) {
    const std::size_t P = x.plane();
    Tensor<T> y(x.n, {out, x.shape.h, x.shape.w});
    for (std::size_t i = 0; i < x.n; ++i) {
        T* dst = y.sample(i).data();
        for (std::size_t o = 0; o < out; ++o) std::fill(dst + o * P, dst + (o + 1) * P, bias.empty() ? T{0} : bias[o]);
        gemm_nn(out, P, x.shape.c, weight.data(), x.sample(i).data(), dst);
    }
    return y;
}

template <typename T>
Tensor<T> pointwise_backward(const Tensor<T>& x, const Tensor<T>& dy, std::span<const T> weight,
                             std::span<T> dweight, std::span<T> dbias) {
    const std::size_t P = x.plane(), out = dy.shape.c, in = x.shape.c;
    Tensor<T> dx(x.n, x.shape);
    for (std::size_t i = 0; i < x.n; ++i) {
        const T* g = dy.sample(i).data();
        if (!dweight.empty()) gemm_nt(out, in, P, g, x.sample(i).data(), dweight.data());
        if (!dbias.empty()) {
            for (std::size_t o = 0; o < out; ++o) {
                T acc = 0;
                for (std::size_t q = 0; q < P; ++q) acc += g[o * P + q];
                dbias[o] += acc;
            }
        }
        gemm_tn(in, P, out, weight.data(), g, dx.sample(i).data());
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Batch normalization over (N, H, W) per channel.

template <typename T>
struct BatchNormCache {
    Tensor<T> xhat;
    std::vector<T> inv_std;
    bool batch_stats = true;
};

template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, std::span<const T> gamma, std::span<const T> beta,
                            std::span<T> running_mean, std::span<T> running_var, bool use_batch_stats,
                            bool update_running, double momentum, double eps, BatchNormCache<T>& cache) {
    const std::size_t C = x.shape.c, P = x.plane(), M = x.n * P;
    Tensor<T> y(x.n, x.shape);
    cache.xhat = Tensor<T>(x.n, x.shape);
    cache.inv_std.assign(C, T{0});
    cache.batch_stats = use_batch_stats;
    parallel_for(C, [&](std::size_t c) {
        double mean, var;
        if (use_batch_stats) {
            double s = 0;
            for (std::size_t i = 0; i < x.n; ++i) {
                const T* src = x.sample(i).data() + c * P;
                for (std::size_t q = 0; q < P; ++q) s += src[q];
            }
            mean = s / double(M);
            double ss = 0;
            for (std::size_t i = 0; i < x.n; ++i) {
                const T* src = x.sample(i).data() + c * P;
                for (std::size_t q = 0; q < P; ++q) {
                    const double d = src[q] - mean;
                    ss += d * d;
                }
            }
            var = ss / double(M);
            if (update_running) {
                const double unbiased = M > 1 ? ss / double(M - 1) : var;
                running_mean[c] = static_cast<T>(momentum * running_mean[c] + (1 - momentum) * mean);
                running_var[c] = static_cast<T>(momentum * running_var[c] + (1 - momentum) * unbiased);
            }
        } else {
            mean = running_mean[c];
            var = running_var[c];
        }
        const T inv = static_cast<T>(1.0 / std::sqrt(var + eps));
        cache.inv_std[c] = inv;
        const T m = static_cast<T>(mean);
        for (std::size_t i = 0; i < x.n; ++i) {
            const T* src = x.sample(i).data() + c * P;
            T* xh = cache.xhat.sample(i).data() + c * P;
            T* dst = y.sample(i).data() + c * P;
            for (std::size_t q = 0; q < P; ++q) {
                xh[q] = (src[q] - m) * inv;
                dst[q] = gamma[c] * xh[q] + beta[c];
            }
        }
    });
    return y;
}

template <typename T>
Tensor<T> batchnorm_backward(const Tensor<T>& dy, std::span<const T> gamma, std::span<T> dgamma, std::span<T> dbeta,
                             const BatchNormCache<T>& cache) {
    const std::size_t C = dy.shape.c, P = dy.plane(), M = dy.n * P;
    Tensor<T> dx(dy.n, dy.shape);
    parallel_for(C, [&](std::size_t c) {
        T sum_dy = 0, sum_dy_xhat = 0;
        for (std::size_t i = 0; i < dy.n; ++i) {
            const T* g = dy.sample(i).data() + c * P;
            const T* xh = cache.xhat.sample(i).data() + c * P;
            for (std::size_t q = 0; q < P; ++q) {
                sum_dy += g[q];
                sum_dy_xhat += g[q] * xh[q];
            }
        }
        if (!dgamma.empty()) {
            dgamma[c] += sum_dy_xhat;
            dbeta[c] += sum_dy;
        }
        const T scale = gamma[c] * cache.inv_std[c];
        for (std::size_t i = 0; i < dy.n; ++i) {
            const T* g = dy.sample(i).data() + c * P;
            const T* xh = cache.xhat.sample(i).data() + c * P;
            T* dst = dx.sample(i).data() + c * P;
            if (cache.batch_stats) {
                const T invM = T(1) / T(M);
                for (std::size_t q = 0; q < P; ++q) dst[q] = scale * (g[q] - invM * sum_dy - xh[q] * invM * sum_dy_xhat);
            } else {
                for (std::size_t q = 0; q < P; ++q) dst[q] = scale * g[q];
            }
        }
    });
    return dx;
}

// ---------------------------------------------------------------------------
// Pointwise nonlinearities. Backward takes the forward input and output.

enum class Activation { none, leaky_relu, relu, tanh, sigmoid };

template <typename T>
T activate(Activation a, T v, T slope) {
    switch (a) {
        case Activation::leaky_relu: return v > 0 ? v : slope * v;
        case Activation::relu: return v > 0 ? v : T{0};
        case Activation::tanh: return std::tanh(v);
        case Activation::sigmoid: return T(1) / (T(1) + std::exp(-v));
        case Activation::none: break;
    }
    return v;
}

template <typename T>
T activate_grad(Activation a, T in, T out, T slope) {
    switch (a) {
        case Activation::leaky_relu: return in > 0 ? T{1} : slope;
        case Activation::relu: return in > 0 ? T{1} : T{0};
        case Activation::tanh: return T(1) - out * out;
        case Activation::sigmoid: return out * (T(1) - out);
        case Activation::none: break;
    }
    return T{1};
}

template <typename T>
Tensor<T> activation_forward(const Tensor<T>& x, Activation a, T slope) {
    Tensor<T> y(x.n, x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = activate(a, x.data[i], slope);
    return y;
}

template <typename T>
Tensor<T> activation_backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& dy, Activation a, T slope) {
    Tensor<T> dx(x.n, x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) dx.data[i] = dy.data[i] * activate_grad(a, x.data[i], y.data[i], slope);
    return dx;
}

// ---------------------------------------------------------------------------
// Inverted dropout: kept units are scaled by 1/(1-rate).

template <typename T>
std::vector<T> dropout_mask(std::size_t count, double rate, std::uint64_t seed) {
    std::vector<T> mask(count);
    Rng rng(seed);
    const T keep = static_cast<T>(1.0 / (1.0 - rate));
    for (auto& m : mask) m = rng.uniform() < rate ? T{0} : keep;
    return mask;
}

template <typename T>
Tensor<T> apply_mask(const Tensor<T>& x, const std::vector<T>& mask) {
    Tensor<T> y(x.n, x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = x.data[i] * mask[i];
    return y;
}

}  // namespace dentgan::kernels
