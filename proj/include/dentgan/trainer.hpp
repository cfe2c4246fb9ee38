#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "config.hpp"
#include "data_pipeline.hpp"
#include "label_codec.hpp"
#include "losses.hpp"
#include "network.hpp"
#include "optim.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace dentgan {

struct StepLosses {
    std::uint64_t step = 0;
    double d_loss = 0, g_adv = 0, g_l1 = 0, g_total = 0;
    friend bool operator==(const StepLosses&, const StepLosses&) = default;
};

struct EpochSummary {
    std::uint64_t epoch = 0;
    std::size_t steps = 0;
    double d_loss = 0, g_adv = 0, g_l1 = 0, g_total = 0;  // means
};

struct TrainReport {
    std::vector<StepLosses> steps;
    std::vector<EpochSummary> epochs;
};

/// Both networks, their optimizers and the global step counter.
struct TrainState {
    TrainConfig cfg;
    Network<float> generator;
    Network<float> discriminator;
    Adam<float> opt_g;
    Adam<float> opt_d;
    std::uint64_t step = 0;
    /// Snapshot-check the freeze contract around every phase (slow).
    bool verify_freeze = false;
};

// Stream tags for derive_seed.
enum : std::uint64_t { kTagInitG = 1, kTagInitD = 2, kTagShuffle = 3, kTagPhaseD = 4, kTagPhaseG = 5 };

inline TrainState init_state(const TrainConfig& cfg) {
    cfg.validate();
    TrainState s;
    s.cfg = cfg;
    s.generator = build_generator<float>(cfg.arch);
    s.discriminator = build_discriminator<float>(cfg.arch);
    s.generator.init_weights(derive_seed({cfg.seed, kTagInitG}));
    s.discriminator.init_weights(derive_seed({cfg.seed, kTagInitD}));
    const AdamConfig adam{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};
    s.opt_g.cfg = adam;
    s.opt_d.cfg = adam;
    return s;
}

// ---------------------------------------------------------------------------
// Tensor conversion

/// Radiographs as [N, 1, H, W] in [-1,1].
inline Tensor<float> radiograph_tensor(const std::vector<const SamplePair*>& batch) {
    const auto& f = batch.front()->radiograph;
    Tensor<float> x(batch.size(), {1, f.height, f.width});
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& r = batch[i]->radiograph;
        for (std::size_t k = 0; k < r.data.size(); ++k) x.data[i * r.data.size() + k] = normalize(r.data[k]);
    }
    return x;
}

/// Palette-RGB targets as [N, 3, H, W] in [-1,1].
inline Tensor<float> target_tensor(const std::vector<const SamplePair*>& batch, const ClassPalette& palette) {
    const auto& f = batch.front()->mask;
    Tensor<float> y(batch.size(), {3, f.height, f.width});
    const std::size_t plane = f.pixel_count();
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto rgb = mask_to_target(batch[i]->mask, palette);
        for (std::size_t p = 0; p < plane; ++p) {
            for (std::size_t c = 0; c < 3; ++c) y.data[(i * 3 + c) * plane + p] = rgb.data[3 * p + c];
        }
    }
    return y;
}

/// Sample `i` of an [N, 3, H, W] tensor as an interleaved RGB float image.
inline RgbFloatImage to_rgb_image(const Tensor<float>& t, std::size_t i) {
    RgbFloatImage img(t.shape.w, t.shape.h);
    const std::size_t plane = t.plane();
    for (std::size_t p = 0; p < plane; ++p) {
        for (std::size_t c = 0; c < 3; ++c) img.data[3 * p + c] = t.data[(i * t.shape.c + c) * plane + p];
    }
    return img;
}

// ---------------------------------------------------------------------------
// One alternating update

namespace trainer_detail {

inline std::vector<float> snapshot(Network<float>& net) {
    std::vector<float> out;
    net.for_each_parameter([&](const std::string&, std::vector<float>& p, std::vector<float>&) {
        out.insert(out.end(), p.begin(), p.end());
    });
    return out;
}

inline Tensor<float> prob_grad(const Tensor<float>& probs, double target) {
    Tensor<float> g(probs.n, probs.shape);
    const double scale = 1.0 / static_cast<double>(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) g.data[i] = static_cast<float>(scale * losses::bce_grad(probs.data[i], target));
    return g;
}

}  // namespace trainer_detail

/// Discriminator phase: G runs forward only; D gets one Adam update on the
/// summed real/fake loss. Returns d_loss.
inline double discriminator_phase(TrainState& s, const Tensor<float>& x, const Tensor<float>& y) {
    const auto seed = derive_seed({s.cfg.seed, s.step, kTagPhaseD});
    std::vector<float> before_g;
    if (s.verify_freeze) before_g = trainer_detail::snapshot(s.generator);

    const auto fake = s.generator.forward(x, {Mode::train, derive_seed({seed, 0}), false});
    auto& D = s.discriminator;
    D.zero_grad();
    const auto p_real = D.forward(concat_channels(x, y), {Mode::train, derive_seed({seed, 1}), true});
    D.backward(trainer_detail::prob_grad(p_real, 1.0));
    const auto p_fake = D.forward(concat_channels(x, fake), {Mode::train, derive_seed({seed, 2}), true});
    D.backward(trainer_detail::prob_grad(p_fake, 0.0));
    s.opt_d.step(D);

    if (s.verify_freeze && trainer_detail::snapshot(s.generator) != before_g) {
        throw Error("generator changed during discriminator phase");
    }
    return losses::d_loss<float>(p_real.data, p_fake.data);
}

/// Generator phase: gradients flow through a frozen D into G; only G is
/// updated.
inline StepLosses generator_phase(TrainState& s, const Tensor<float>& x, const Tensor<float>& y) {
    const auto seed = derive_seed({s.cfg.seed, s.step, kTagPhaseG});
    std::vector<float> before_d;
    if (s.verify_freeze) before_d = trainer_detail::snapshot(s.discriminator);

    auto& G = s.generator;
    G.zero_grad();
    const auto fake = G.forward(x, {Mode::train, derive_seed({seed, 0}), true});
    const auto p = s.discriminator.forward(concat_channels(x, fake), {Mode::train, derive_seed({seed, 1}), false});
    const auto d_in = s.discriminator.backward(trainer_detail::prob_grad(p, 1.0), /*param_grads=*/false);
    auto d_fake = slice_channels(d_in, x.shape.c, fake.shape.c);
    losses::l1_grad<float>(y.data, fake.data, s.cfg.lambda_l1, d_fake.data);
    G.backward(d_fake);
    s.opt_g.step(G);

    if (s.verify_freeze && trainer_detail::snapshot(s.discriminator) != before_d) {
        throw Error("discriminator changed during generator phase");
    }
    StepLosses out;
    out.g_adv = losses::g_adv_loss<float>(p.data);
    out.g_l1 = losses::l1_loss<float>(y.data, fake.data);
    out.g_total = losses::g_total(out.g_adv, out.g_l1, {s.cfg.lambda_l1});
    return out;
}

/// One D update followed by one G update; advances the step counter.
inline StepLosses train_step(TrainState& s, const Tensor<float>& x, const Tensor<float>& y) {
    ++s.step;
    try {
        const double d = discriminator_phase(s, x, y);
        auto out = generator_phase(s, x, y);
        out.step = s.step;
        out.d_loss = d;
        return out;
    } catch (const NonFiniteActivation& e) {
        throw NonFiniteActivation("step " + std::to_string(s.step) + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Checkpoints

inline Checkpoint make_checkpoint(TrainState& s, std::uint64_t steps_per_epoch, const std::string& config_text) {
    Checkpoint c;
    c.step = s.step;
    c.epoch = steps_per_epoch ? s.step / steps_per_epoch : 0;
    c.seed = s.cfg.seed;
    c.adam_steps_g = s.opt_g.t;
    c.adam_steps_d = s.opt_d.t;
    c.config = config_text;
    const auto put = [&](const std::string& prefix, Network<float>& net, Adam<float>& opt) {
        net.for_each_tensor([&](const std::string& n, std::vector<float>& v) { c.tensors[prefix + "/" + n] = v; });
        for (const auto& [n, m] : opt.moments) {
            c.tensors[prefix + ".adam_m/" + n] = m.m;
            c.tensors[prefix + ".adam_v/" + n] = m.v;
        }
    };
    put("G", s.generator, s.opt_g);
    put("D", s.discriminator, s.opt_d);
    return c;
}

/// Arch config recorded in a checkpoint's config snapshot.
inline ArchConfig checkpoint_arch(const Checkpoint& c) { return parse_config(c.config).train.arch; }

/// Rebuilds training state from a checkpoint. `cfg` must describe the same
/// architecture as the snapshot.
inline TrainState restore_state(const Checkpoint& c, const TrainConfig& cfg) {
    const ArchConfig saved = checkpoint_arch(c);
    if (arch_signature(saved) != arch_signature(cfg.arch)) {
        throw VersionMismatch("checkpoint architecture differs from config:\n" + arch_signature(saved) + "vs\n" +
                              arch_signature(cfg.arch));
    }
    TrainState s = init_state(cfg);
    s.step = c.step;
    s.opt_g.t = c.adam_steps_g;
    s.opt_d.t = c.adam_steps_d;
    const auto get = [&](const std::string& prefix, Network<float>& net, Adam<float>& opt) {
        net.for_each_tensor([&](const std::string& n, std::vector<float>& v) {
            const auto it = c.tensors.find(prefix + "/" + n);
            if (it == c.tensors.end() || it->second.size() != v.size()) {
                throw VersionMismatch("checkpoint tensor " + prefix + "/" + n + " missing or mis-sized");
            }
            v = it->second;
        });
        const std::string mp = prefix + ".adam_m/", vp = prefix + ".adam_v/";
        for (const auto& [name, values] : c.tensors) {
            if (name.starts_with(mp)) opt.moments[name.substr(mp.size())].m = values;
            if (name.starts_with(vp)) opt.moments[name.substr(vp.size())].v = values;
        }
    };
    get("G", s.generator, s.opt_g);
    get("D", s.discriminator, s.opt_d);
    return s;
}

/// Generator only, for inference.
inline Network<float> load_generator(const Checkpoint& c) {
    const ArchConfig arch = checkpoint_arch(c);
    auto g = build_generator<float>(arch);
    g.for_each_tensor([&](const std::string& n, std::vector<float>& v) {
        const auto it = c.tensors.find("G/" + n);
        if (it == c.tensors.end() || it->second.size() != v.size()) {
            throw VersionMismatch("checkpoint tensor G/" + n + " missing or mis-sized");
        }
        v = it->second;
    });
    return g;
}

// ---------------------------------------------------------------------------
// Training loop

struct FitOptions {
    std::optional<std::filesystem::path> out_dir;  // checkpoints go here
    std::string config_text;                       // snapshot stored in checkpoints
    std::optional<std::uint64_t> stop_after_step;  // end early (still checkpoints)
    bool verify_freeze = false;
    std::function<void(const StepLosses&)> on_step;
};

struct FitResult {
    TrainState state;
    TrainReport report;
};

inline std::uint64_t steps_per_epoch(std::size_t dataset_size, std::size_t batch_size) {
    return dataset_size / batch_size;
}

/// Dataset order for `epoch`, a seeded Fisher-Yates shuffle.
inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed({seed, kTagShuffle, epoch}));
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

inline FitResult fit(const Dataset& data, const TrainConfig& cfg, const std::optional<Checkpoint>& resume = {},
                     const FitOptions& opt = {}) {
    if (data.pairs.empty()) throw EmptyDataset("no training pairs");
    cfg.validate();
    for (const auto& p : data.pairs) {
        if (p.mask.width != cfg.arch.image_size || p.mask.height != cfg.arch.image_size) {
            throw DimensionMismatch(p.id + " is not " + std::to_string(cfg.arch.image_size) + " px square");
        }
    }
    const auto spe = steps_per_epoch(data.pairs.size(), cfg.batch_size);
    if (spe == 0 && cfg.epochs > 0) throw EmptyDataset("fewer pairs than batch_size");
    const std::string config_text = opt.config_text.empty() ? [&] {
        RunConfig rc;
        rc.train = cfg;
        return serialize_config(rc);
    }() : opt.config_text;

    FitResult res{resume ? restore_state(*resume, cfg) : init_state(cfg), {}};
    auto& s = res.state;
    s.verify_freeze = opt.verify_freeze;
    const auto palette = default_palette();
    const std::uint64_t total = cfg.epochs * spe;
    const std::uint64_t last = opt.stop_after_step ? std::min(total, *opt.stop_after_step) : total;

    const auto save = [&] {
        if (!opt.out_dir) return;
        std::filesystem::create_directories(*opt.out_dir);
        save_checkpoint(*opt.out_dir / ("ckpt-" + std::to_string(s.step) + ".bin"), make_checkpoint(s, spe, config_text));
    };

    std::vector<std::size_t> order;
    std::uint64_t order_epoch = ~std::uint64_t{0};
    EpochSummary acc;
    const auto flush_epoch = [&] {
        if (acc.steps == 0) return;
        const double k = 1.0 / double(acc.steps);
        acc.d_loss *= k;
        acc.g_adv *= k;
        acc.g_l1 *= k;
        acc.g_total *= k;
        res.report.epochs.push_back(acc);
        acc = {};
    };

    while (s.step < last) {
        const std::uint64_t epoch = s.step / spe, pos = s.step % spe;
        if (epoch != order_epoch) {
            flush_epoch();
            order = epoch_order(data.pairs.size(), cfg.seed, epoch);
            order_epoch = epoch;
            acc.epoch = epoch;
        }
        std::vector<const SamplePair*> batch;
        for (std::size_t b = 0; b < cfg.batch_size; ++b) batch.push_back(&data.pairs[order[pos * cfg.batch_size + b]]);
        const auto losses = train_step(s, radiograph_tensor(batch), target_tensor(batch, palette));
        res.report.steps.push_back(losses);
        ++acc.steps;
        acc.d_loss += losses.d_loss;
        acc.g_adv += losses.g_adv;
        acc.g_l1 += losses.g_l1;
        acc.g_total += losses.g_total;
        if (opt.on_step) opt.on_step(losses);
        if (cfg.checkpoint_every && s.step % cfg.checkpoint_every == 0 && s.step != last) save();
    }
    flush_epoch();
    save();
    return res;
}

// ---------------------------------------------------------------------------
// Inference helpers

/// Eval-mode class prediction for one radiograph already at network size.
inline IndexMask predict_mask(Network<float>& generator, const GrayImage& radiograph, const ClassPalette& palette) {
    const SamplePair tmp{"", radiograph, IndexMask(radiograph.width, radiograph.height)};
    const auto out = generator.forward(radiograph_tensor({&tmp}), {Mode::eval, 0, false});
    return quantize_output(to_rgb_image(out, 0), palette);
}

// ---------------------------------------------------------------------------
// losses.csv

inline std::string losses_csv_header() { return "step,d_loss,g_adv,g_l1,g_total\n"; }

inline std::string losses_csv_row(const StepLosses& l) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%llu,%.9g,%.9g,%.9g,%.9g\n", static_cast<unsigned long long>(l.step), l.d_loss,
                  l.g_adv, l.g_l1, l.g_total);
    return buf;
}

/// Writes the loss log; when resuming, rows up to `keep_through` from an
/// existing file are preserved so the log covers the whole run.
inline void write_losses_csv(const std::filesystem::path& path, const std::vector<StepLosses>& rows,
                             std::uint64_t keep_through = 0) {
    std::string prior;
    if (keep_through > 0 && std::filesystem::exists(path)) {
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (std::stoull(line.substr(0, line.find(','))) <= keep_through) prior += line + "\n";
        }
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << losses_csv_header() << prior;
    for (const auto& r : rows) out << losses_csv_row(r);
}

}  // namespace dentgan
