#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "layers.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace dentgan {

using kernels::Activation;

struct ArchConfig {
    std::size_t image_size = 256;
    std::size_t depth = 8;
    std::size_t base_width = 64;
    std::size_t input_channels = 1;
    std::size_t output_channels = 3;
    bool skip_connections = true;
    double leaky_slope = 0.2;

    void validate() const {
        if (image_size == 0 || !std::has_single_bit(image_size)) throw InvalidConfig("image_size must be a power of two");
        if (depth < 1 || (std::size_t{1} << depth) > image_size) {
            throw InvalidConfig("depth must satisfy 1 <= depth <= log2(image_size)");
        }
        if (image_size < 16) throw InvalidConfig("image_size must be >= 16 for the four discriminator convs");
        if (base_width < 1) throw InvalidConfig("base_width must be >= 1");
        if (input_channels < 1 || output_channels < 1) throw InvalidConfig("channel counts must be >= 1");
        if (!(leaky_slope >= 0.0) || !std::isfinite(leaky_slope)) throw InvalidConfig("leaky_slope must be finite and >= 0");
    }

    friend bool operator==(const ArchConfig&, const ArchConfig&) = default;

    static ArchConfig paper() { return {}; }
    /// Desk-scale configuration used by the smoke and acceptance tests.
    static ArchConfig tiny() {
        ArchConfig c;
        c.image_size = 64;
        c.depth = 6;
        c.base_width = 8;
        return c;
    }
};

enum class LayerKind {
    conv,
    deconv,
    fully_connected,  // dense over the flattened sample
    flatten,          // parameter-free reshape row of the discriminator table
    pointwise,        // per-pixel affine across channels
};

inline const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::conv: return "conv";
        case LayerKind::deconv: return "deconv";
        case LayerKind::fully_connected: return "fully_connected";
        case LayerKind::flatten: return "flatten";
        case LayerKind::pointwise: return "pointwise";
    }
    return "?";
}

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::none: return "none";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::conv;
    std::size_t kernel = 5;
    std::size_t stride = 2;
    std::size_t pad = 2;
    std::size_t output_padding = 1;  // deconv only; makes the output exactly 2x
    std::size_t in_channels = 0;     // fully_connected: flattened input length
    std::size_t out_channels = 0;
    bool batch_norm = false;
    Activation activation = Activation::none;
    double dropout = 0.0;
    /// Output of this layer is concatenated (after it) to this layer's output.
    std::optional<std::size_t> skip_source;

    bool has_weights() const { return kind != LayerKind::flatten; }
};

/// Trainable tensors and running statistics of one layer.
template <typename T>
struct LayerParams {
    std::vector<T> weight, bias, gamma, beta, running_mean, running_var;
};

enum class Mode { train, eval };

struct ForwardOptions {
    Mode mode = Mode::eval;
    std::uint64_t seed = 0;          // dropout masks
    bool update_running_stats = true;
};

inline constexpr double kBatchNormMomentum = 0.9;
inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kInitStd = 0.02;

inline std::size_t weight_count(const LayerSpec& l) {
    switch (l.kind) {
        case LayerKind::conv:
        case LayerKind::deconv: return l.kernel * l.kernel * l.in_channels * l.out_channels;
        case LayerKind::fully_connected:
        case LayerKind::pointwise: return l.in_channels * l.out_channels;
        case LayerKind::flatten: return 0;
    }
    return 0;
}

/// Trainable scalars: weights, biases and batch-norm scale/shift.
inline std::size_t parameter_count(const std::vector<LayerSpec>& layers) {
    std::size_t n = 0;
    for (const auto& l : layers) {
        n += weight_count(l);
        if (l.has_weights()) n += l.out_channels;
        if (l.batch_norm) n += 2 * l.out_channels;
    }
    return n;
}

/// Per-layer output shapes (after any skip concatenation).
inline std::vector<Shape> infer_shapes(const std::vector<LayerSpec>& layers, Shape in) {
    std::vector<Shape> out;
    out.reserve(layers.size());
    Shape cur = in;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        const bool flat_input = l.kind == LayerKind::fully_connected;
        const std::size_t have = flat_input ? cur.size() : cur.c;
        if (have != l.in_channels) {
            throw ShapeMismatch("layer " + std::to_string(i) + " (" + l.name + ") expects " +
                                std::to_string(l.in_channels) + (flat_input ? " inputs" : " channels") +
                                ", got " + std::to_string(have));
        }
        Shape next;
        switch (l.kind) {
            case LayerKind::conv:
                if (cur.h + 2 * l.pad < l.kernel || cur.w + 2 * l.pad < l.kernel) {
                    throw ShapeMismatch("layer " + std::to_string(i) + " (" + l.name + ") input too small");
                }
                next = {l.out_channels, kernels::conv_out(cur.h, l.kernel, l.stride, l.pad),
                        kernels::conv_out(cur.w, l.kernel, l.stride, l.pad)};
                break;
            case LayerKind::deconv:
                next = {l.out_channels, kernels::deconv_out(cur.h, l.kernel, l.stride, l.pad, l.output_padding),
                        kernels::deconv_out(cur.w, l.kernel, l.stride, l.pad, l.output_padding)};
                break;
            case LayerKind::fully_connected: next = {l.out_channels, 1, 1}; break;
            case LayerKind::flatten: next = {cur.size(), 1, 1}; break;
            case LayerKind::pointwise: next = {l.out_channels, cur.h, cur.w}; break;
        }
        if (l.skip_source) {
            const Shape& s = out.at(*l.skip_source);
            if (s.h != next.h || s.w != next.w) {
                throw ShapeMismatch("layer " + std::to_string(i) + " (" + l.name + ") skip " +
                                    to_string(s) + " vs " + to_string(next));
            }
            next.c += s.c;
        }
        out.push_back(next);
        cur = next;
    }
    return out;
}

/// Ordered layer list with parameters, cached activations for the backward
/// pass and accumulated gradients.
template <typename T>
class Network {
public:
    Network() = default;
    Network(std::string name, std::vector<LayerSpec> layers, Shape input, T leaky_slope)
        : name_(std::move(name)), layers_(std::move(layers)), input_(input), slope_(leaky_slope) {
        params_.resize(layers_.size());
        grads_.resize(layers_.size());
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const auto& l = layers_[i];
            auto& p = params_[i];
            p.weight.assign(weight_count(l), T{0});
            if (l.has_weights()) p.bias.assign(l.out_channels, T{0});
            if (l.batch_norm) {
                p.gamma.assign(l.out_channels, T{1});
                p.beta.assign(l.out_channels, T{0});
                p.running_mean.assign(l.out_channels, T{0});
                p.running_var.assign(l.out_channels, T{1});
            }
        }
        zero_grad();
    }

    const std::string& name() const { return name_; }
    const std::vector<LayerSpec>& layers() const { return layers_; }
    Shape input_shape() const { return input_; }
    T leaky_slope() const { return slope_; }

    std::vector<LayerParams<T>>& params() { return params_; }
    const std::vector<LayerParams<T>>& params() const { return params_; }
    std::vector<LayerParams<T>>& grads() { return grads_; }
    const std::vector<LayerParams<T>>& grads() const { return grads_; }

    static std::size_t weight_count(const LayerSpec& l) { return dentgan::weight_count(l); }


    /// Zero-mean Gaussian weights; biases and shifts 0, scales 1.
    void init_weights(std::uint64_t seed, double stddev = kInitStd) {
        Rng rng(seed);
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            auto& p = params_[i];
            for (auto& w : p.weight) w = static_cast<T>(stddev * rng.normal());
            std::fill(p.bias.begin(), p.bias.end(), T{0});
            std::fill(p.gamma.begin(), p.gamma.end(), T{1});
            std::fill(p.beta.begin(), p.beta.end(), T{0});
            std::fill(p.running_mean.begin(), p.running_mean.end(), T{0});
            std::fill(p.running_var.begin(), p.running_var.end(), T{1});
        }
    }

    void zero_grad() {
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            grads_[i].weight.assign(params_[i].weight.size(), T{0});
            grads_[i].bias.assign(params_[i].bias.size(), T{0});
            grads_[i].gamma.assign(params_[i].gamma.size(), T{0});
            grads_[i].beta.assign(params_[i].beta.size(), T{0});
        }
    }

    /// Per-layer output shapes (after any skip concatenation).
    std::vector<Shape> infer_shapes(Shape in) const { return dentgan::infer_shapes(layers_, in); }

    std::vector<Shape> infer_shapes() const { return infer_shapes(input_); }

    /// Shape entering each layer (spatial shape before flatten included).
    std::vector<Shape> input_shapes() const {
        auto outs = infer_shapes();
        std::vector<Shape> ins{input_};
        for (std::size_t i = 0; i + 1 < outs.size(); ++i) ins.push_back(outs[i]);
        return ins;
    }

    std::size_t count_parameters() const {
        std::size_t n = 0;
        for (const auto& p : params_) n += p.weight.size() + p.bias.size() + p.gamma.size() + p.beta.size();
        return n;
    }

    Tensor<T> forward(const Tensor<T>& x, const ForwardOptions& opt) {
        infer_shapes(x.shape);
        const std::size_t L = layers_.size();
        cache_.assign(L, {});
        input_cache_ = x;
        last_mode_ = opt.mode;
        const Tensor<T>* cur = &x;
        for (std::size_t i = 0; i < L; ++i) {
            const auto& l = layers_[i];
            auto& p = params_[i];
            auto& c = cache_[i];
            Tensor<T> z;
            switch (l.kind) {
                case LayerKind::conv:
                    z = kernels::conv_forward<T>(*cur, p.weight, p.bias, l.out_channels, l.kernel, l.stride, l.pad);
                    break;
                case LayerKind::deconv:
                    z = kernels::deconv_forward<T>(*cur, p.weight, p.bias, l.out_channels, l.kernel, l.stride, l.pad,
                                                   l.output_padding);
                    break;
                case LayerKind::fully_connected:
                    z = kernels::dense_forward<T>(*cur, p.weight, p.bias, l.out_channels);
                    break;
                case LayerKind::flatten:
                    z = *cur;
                    z.shape = {cur->sample_size(), 1, 1};
                    break;
                case LayerKind::pointwise:
                    z = kernels::pointwise_forward<T>(*cur, p.weight, p.bias, l.out_channels);
                    break;
            }
            if (l.batch_norm) {
                c.pre_bn = std::move(z);
                z = kernels::batchnorm_forward<T>(c.pre_bn, p.gamma, p.beta, p.running_mean, p.running_var,
                                                  opt.mode == Mode::train,
                                                  opt.mode == Mode::train && opt.update_running_stats,
                                                  kBatchNormMomentum, kBatchNormEps, c.bn);
            }
            c.pre_act = std::move(z);
            c.act = kernels::activation_forward(c.pre_act, l.activation, slope_);
            Tensor<T> out;
            if (opt.mode == Mode::train && l.dropout > 0.0) {
                c.mask = kernels::dropout_mask<T>(c.act.size(), l.dropout, derive_seed({opt.seed, i}));
                out = kernels::apply_mask(c.act, c.mask);
            } else {
                c.mask.clear();
                out = c.act;
            }
            if (l.skip_source) out = concat_channels(out, cache_[*l.skip_source].out);
            check_finite(out, i);
            c.out = std::move(out);
            cur = &c.out;
        }
        return cache_.back().out;
    }

    /// Reverse pass from d(loss)/d(output) of the last forward call. With
    /// `param_grads` false the parameters are treated as frozen: nothing is
    /// accumulated into grads(). Returns d(loss)/d(input).
    Tensor<T> backward(const Tensor<T>& dout, bool param_grads = true) {
        const std::size_t L = layers_.size();
        if (cache_.size() != L) throw Error("backward called before forward");
        std::vector<Tensor<T>> g(L);
        g[L - 1] = dout;
        Tensor<T> dinput;
        for (std::size_t ii = L; ii-- > 0;) {
            const auto& l = layers_[ii];
            auto& p = params_[ii];
            auto& gr = grads_[ii];
            auto& c = cache_[ii];
            const Tensor<T>& in = ii == 0 ? input_cache_ : cache_[ii - 1].out;
            Tensor<T> go = std::move(g[ii]);
            if (go.data.empty()) go = Tensor<T>(c.out.n, c.out.shape);
            if (l.skip_source) {
                const std::size_t own = c.act.shape.c;
                accumulate(g[*l.skip_source], slice_channels(go, own, go.shape.c - own), cache_[*l.skip_source].out);
                go = slice_channels(go, 0, own);
            }
            if (!c.mask.empty()) go = kernels::apply_mask(go, c.mask);
            go = kernels::activation_backward(c.pre_act, c.act, go, l.activation, slope_);
            const auto pick = [param_grads](std::vector<T>& v) { return param_grads ? std::span<T>(v) : std::span<T>(); };
            if (l.batch_norm) go = kernels::batchnorm_backward<T>(go, p.gamma, pick(gr.gamma), pick(gr.beta), c.bn);
            Tensor<T> gi;
            switch (l.kind) {
                case LayerKind::conv:
                    gi = kernels::conv_backward<T>(in, go, p.weight, pick(gr.weight), pick(gr.bias), l.kernel, l.stride,
                                                   l.pad);
                    break;
                case LayerKind::deconv:
                    gi = kernels::deconv_backward<T>(in, go, p.weight, pick(gr.weight), pick(gr.bias), l.kernel,
                                                     l.stride, l.pad);
                    break;
                case LayerKind::fully_connected:
                    gi = kernels::dense_backward<T>(in, go, p.weight, pick(gr.weight), pick(gr.bias));
                    break;
                case LayerKind::flatten:
                    gi = std::move(go);
                    gi.shape = in.shape;
                    break;
                case LayerKind::pointwise:
                    gi = kernels::pointwise_backward<T>(in, go, p.weight, pick(gr.weight), pick(gr.bias));
                    break;
            }
            if (ii == 0) {
                dinput = std::move(gi);
            } else {
                accumulate(g[ii - 1], gi, cache_[ii - 1].out);
            }
        }
        return dinput;
    }

    /// Visits every trainable tensor as (name, values, grads).
    template <typename Fn>
    void for_each_parameter(Fn&& fn) {
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const auto& n = layers_[i].name;
            auto& p = params_[i];
            auto& g = grads_[i];
            if (!p.weight.empty()) fn(n + ".weight", p.weight, g.weight);
            if (!p.bias.empty()) fn(n + ".bias", p.bias, g.bias);
            if (!p.gamma.empty()) fn(n + ".bn_gamma", p.gamma, g.gamma);
            if (!p.beta.empty()) fn(n + ".bn_beta", p.beta, g.beta);
        }
    }

    /// Every stored tensor (parameters and running statistics) by name.
    template <typename Fn>
    void for_each_tensor(Fn&& fn) {
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const auto& n = layers_[i].name;
            auto& p = params_[i];
            if (!p.weight.empty()) fn(n + ".weight", p.weight);
            if (!p.bias.empty()) fn(n + ".bias", p.bias);
            if (!p.gamma.empty()) fn(n + ".bn_gamma", p.gamma);
            if (!p.beta.empty()) fn(n + ".bn_beta", p.beta);
            if (!p.running_mean.empty()) fn(n + ".bn_running_mean", p.running_mean);
            if (!p.running_var.empty()) fn(n + ".bn_running_var", p.running_var);
        }
    }

    template <typename Fn>
    void for_each_tensor(Fn&& fn) const {
        const_cast<Network*>(this)->for_each_tensor(
            [&](const std::string& n, std::vector<T>& v) { fn(n, static_cast<const std::vector<T>&>(v)); });
    }

private:
    struct Cache {
        Tensor<T> pre_bn, pre_act, act, out;
        kernels::BatchNormCache<T> bn;
        std::vector<T> mask;
    };

    static void accumulate(Tensor<T>& dst, const Tensor<T>& src, const Tensor<T>& like) {
        if (dst.data.empty()) dst = Tensor<T>(like.n, like.shape);
        for (std::size_t k = 0; k < src.size(); ++k) dst.data[k] += src.data[k];
    }

    void check_finite(const Tensor<T>& t, std::size_t layer) const {
        for (T v : t.data) {
            if (!std::isfinite(v)) {
                throw NonFiniteActivation(name_ + " layer " + std::to_string(layer) + " (" + layers_[layer].name + ")");
            }
        }
    }

    std::string name_;
    std::vector<LayerSpec> layers_;
    Shape input_;
    T slope_ = T(0.2);
    std::vector<LayerParams<T>> params_;
    std::vector<LayerParams<T>> grads_;
    std::vector<Cache> cache_;
    Tensor<T> input_cache_;
    Mode last_mode_ = Mode::eval;
};

// ---------------------------------------------------------------------------
// Architectures

/// Channel multiplier of encoder layer e_i (1-based): 1, 2, 4, 8, 8, ...
inline std::size_t encoder_multiplier(std::size_t i) { return std::size_t{1} << std::min<std::size_t>(i - 1, 3); }

/// U-Net generator: `depth` stride-2 convs, `depth` stride-2 deconvs with
/// d_k's output concatenated with e_{depth-k}, then a per-pixel affine stage
/// and tanh.
inline std::vector<LayerSpec> generator_layers(const ArchConfig& cfg) {
    cfg.validate();
    std::vector<LayerSpec> L;
    const std::size_t n = cfg.depth;
    std::size_t in = cfg.input_channels;
    for (std::size_t i = 1; i <= n; ++i) {
        LayerSpec l;
        l.name = "e" + std::to_string(i);
        l.kind = LayerKind::conv;
        l.in_channels = in;
        l.out_channels = cfg.base_width * encoder_multiplier(i);
        l.batch_norm = true;
        l.activation = Activation::leaky_relu;
        L.push_back(l);
        in = l.out_channels;
    }
    for (std::size_t k = 1; k <= n; ++k) {
        LayerSpec l;
        l.name = "d" + std::to_string(k);
        l.kind = LayerKind::deconv;
        l.in_channels = in;
        if (k < n) {
            l.out_channels = L[n - k - 1].out_channels;  // mirrors e_{n-k}
            l.batch_norm = true;
            l.activation = Activation::relu;
            l.dropout = k <= 3 ? 0.5 : 0.0;
            if (cfg.skip_connections) l.skip_source = n - k - 1;
        } else {
            l.out_channels = cfg.output_channels;
            l.batch_norm = false;
            l.activation = Activation::none;
        }
        L.push_back(l);
        in = l.out_channels + (l.skip_source ? L[*l.skip_source].out_channels : 0);
    }
    LayerSpec out;
    out.name = "out";
    out.kind = LayerKind::pointwise;
    out.kernel = out.stride = 1;
    out.pad = out.output_padding = 0;
    out.in_channels = in;
    out.out_channels = cfg.output_channels;
    out.activation = Activation::tanh;
    L.push_back(out);
    return L;
}

/// Four stride-2 convs on the (radiograph, mask) channel stack, flatten, one
/// sigmoid unit.
inline std::vector<LayerSpec> discriminator_layers(const ArchConfig& cfg) {
    cfg.validate();
    std::vector<LayerSpec> L;
    std::size_t in = cfg.input_channels + cfg.output_channels;
    std::size_t side = cfg.image_size;
    for (std::size_t i = 0; i < 4; ++i) {
        LayerSpec l;
        l.name = "h" + std::to_string(i);
        l.kind = LayerKind::conv;
        l.in_channels = in;
        l.out_channels = cfg.base_width << i;
        l.batch_norm = true;
        l.activation = Activation::leaky_relu;
        L.push_back(l);
        in = l.out_channels;
        side = kernels::conv_out(side, 5, 2, 2);
    }
    LayerSpec flat;
    flat.name = "h4";
    flat.kind = LayerKind::flatten;
    flat.kernel = flat.stride = 1;
    flat.pad = flat.output_padding = 0;
    flat.in_channels = in;
    flat.out_channels = side * side * in;
    L.push_back(flat);
    LayerSpec fc;
    fc.name = "out";
    fc.kind = LayerKind::fully_connected;
    fc.kernel = fc.stride = 1;
    fc.pad = fc.output_padding = 0;
    fc.in_channels = flat.out_channels;
    fc.out_channels = 1;
    fc.activation = Activation::sigmoid;
    L.push_back(fc);
    return L;
}

inline Shape generator_input(const ArchConfig& cfg) { return {cfg.input_channels, cfg.image_size, cfg.image_size}; }

/// Radiograph and segmentation stacked on the channel axis.
inline Shape discriminator_input(const ArchConfig& cfg) {
    return {cfg.input_channels + cfg.output_channels, cfg.image_size, cfg.image_size};
}

template <typename T = float>
Network<T> build_generator(const ArchConfig& cfg) {
    return Network<T>("generator", generator_layers(cfg), generator_input(cfg), static_cast<T>(cfg.leaky_slope));
}

template <typename T = float>
Network<T> build_discriminator(const ArchConfig& cfg) {
    return Network<T>("discriminator", discriminator_layers(cfg), discriminator_input(cfg),
                      static_cast<T>(cfg.leaky_slope));
}

// ---------------------------------------------------------------------------
// Layer table in the column layout of the architecture tables.

struct TableRow {
    std::string op, kernel, stride, channels, norm, activation, remark;
};

inline std::vector<TableRow> layer_table(const std::vector<LayerSpec>& L, Shape input) {
    std::vector<Shape> in_shapes{input};
    for (const auto& s : infer_shapes(L, input)) in_shapes.push_back(s);
    std::vector<TableRow> rows;
    for (std::size_t i = 0; i < L.size(); ++i) {
        const auto& l = L[i];
        TableRow r;
        const bool spatial = l.kind == LayerKind::conv || l.kind == LayerKind::deconv;
        r.op = l.name + ": " + (spatial ? to_string(l.kind) : "fully_connected");
        r.kernel = spatial ? std::to_string(l.kernel) + "x" + std::to_string(l.kernel) : "-";
        r.stride = spatial ? std::to_string(l.stride) + "x" + std::to_string(l.stride) : "-";
        if (l.kind == LayerKind::flatten) {
            const auto& s = in_shapes[i];
            r.channels = std::to_string(s.h) + "*" + std::to_string(s.w) + "*" + std::to_string(s.c);
        } else if (l.skip_source) {
            r.channels = std::to_string(l.out_channels) + "+" + std::to_string(L[*l.skip_source].out_channels);
        } else {
            r.channels = std::to_string(l.out_channels);
        }
        r.norm = l.batch_norm ? "yes" : (spatial || l.kind == LayerKind::pointwise ? "-" : "no");
        r.activation = l.activation == Activation::none ? "-" : to_string(l.activation);
        std::string remark;
        if (l.skip_source) remark = "concat[" + l.name + "," + L[*l.skip_source].name + "]";
        if (l.dropout > 0) {
            std::ostringstream d;
            d << "dropout:" << l.dropout;
            remark += (remark.empty() ? "" : " ") + d.str();
        }
        if (l.kind == LayerKind::pointwise) remark = "per-pixel";
        r.remark = remark.empty() ? "-" : remark;
        rows.push_back(r);
    }
    return rows;
}

template <typename T>
std::vector<TableRow> layer_table(const Network<T>& net) {
    return layer_table(net.layers(), net.input_shape());
}

inline std::string render_table(const std::vector<TableRow>& rows) {
    const std::vector<std::string> head{"op", "kernel", "stride", "channels", "norm", "activation", "remark"};
    std::vector<std::size_t> w(head.size());
    for (std::size_t k = 0; k < head.size(); ++k) w[k] = head[k].size();
    const auto cells = [](const TableRow& r) {
        return std::vector<std::string>{r.op, r.kernel, r.stride, r.channels, r.norm, r.activation, r.remark};
    };
    for (const auto& r : rows) {
        const auto c = cells(r);
        for (std::size_t k = 0; k < c.size(); ++k) w[k] = std::max(w[k], c[k].size());
    }
    std::ostringstream os;
    const auto line = [&](const std::vector<std::string>& c) {
        for (std::size_t k = 0; k + 1 < c.size(); ++k) os << std::left << std::setw(static_cast<int>(w[k])) << c[k] << "  ";
        os << c.back() << "\n";
    };
    line(head);
    for (const auto& r : rows) line(cells(r));
    return os.str();
}

}  // namespace dentgan
