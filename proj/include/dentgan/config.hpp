#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "data_pipeline.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "phantom.hpp"

namespace dentgan {

struct TrainConfig {
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 2;
    std::size_t epochs = 20;
    double lambda_l1 = 100.0;
    std::uint64_t seed = 0;
    std::size_t checkpoint_every = 1000;  // 0 disables periodic checkpoints
    ArchConfig arch;

    void validate() const {
        if (!(learning_rate > 0) || !(epsilon > 0)) throw InvalidConfig("learning_rate and epsilon must be positive");
        if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) throw InvalidConfig("betas must lie in [0,1)");
        if (batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
        if (!(lambda_l1 >= 0) || !std::isfinite(lambda_l1)) throw InvalidConfig("lambda_l1 must be finite and >= 0");
        arch.validate();
    }
};

/// Everything a CLI run can be configured with.
struct RunConfig {
    TrainConfig train;
    AugmentSpec augment;
    PhantomSpec phantom;
    std::string data_dir;
    std::string out_dir;
};

namespace config_detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string fmt_double(double v) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InvalidConfig(key + ": expected a number, got '" + v + "'");
    }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        const auto u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw InvalidConfig(key + ": expected a non-negative integer, got '" + v + "'");
    }
}

inline long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const auto i = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw InvalidConfig(key + ": expected an integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidConfig(key + ": expected true/false, got '" + v + "'");
}

struct Field {
    std::string_view key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

template <typename M>
Field real_field(std::string_view key, M member) {
    return {key, [member](const RunConfig& c) { return fmt_double(member(const_cast<RunConfig&>(c))); },
            [member, key](RunConfig& c, const std::string& v) { member(c) = parse_double(std::string(key), v); }};
}

template <typename M>
Field count_field(std::string_view key, M member) {
    return {key, [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); },
            [member, key](RunConfig& c, const std::string& v) {
                member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(parse_uint(std::string(key), v));
            }};
}

template <typename M>
Field int_field(std::string_view key, M member) {
    return {key, [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); },
            [member, key](RunConfig& c, const std::string& v) {
                member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(parse_int(std::string(key), v));
            }};
}

template <typename M>
Field bool_field(std::string_view key, M member) {
    return {key, [member](const RunConfig& c) { return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false"); },
            [member, key](RunConfig& c, const std::string& v) { member(c) = parse_bool(std::string(key), v); }};
}

template <typename M>
Field text_field(std::string_view key, M member) {
    return {key, [member](const RunConfig& c) { return member(const_cast<RunConfig&>(c)); },
            [member](RunConfig& c, const std::string& v) { member(c) = v; }};
}

#define DG_M(expr) [](RunConfig & c) -> auto& { return expr; }

inline const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        // TrainConfig
        real_field("learning_rate", DG_M(c.train.learning_rate)),
        real_field("beta1", DG_M(c.train.beta1)),
        real_field("beta2", DG_M(c.train.beta2)),
        real_field("epsilon", DG_M(c.train.epsilon)),
        count_field("batch_size", DG_M(c.train.batch_size)),
        count_field("epochs", DG_M(c.train.epochs)),
        real_field("lambda_l1", DG_M(c.train.lambda_l1)),
        count_field("seed", DG_M(c.train.seed)),
        count_field("checkpoint_every", DG_M(c.train.checkpoint_every)),
        // ArchConfig
        count_field("image_size", DG_M(c.train.arch.image_size)),
        count_field("depth", DG_M(c.train.arch.depth)),
        count_field("base_width", DG_M(c.train.arch.base_width)),
        count_field("input_channels", DG_M(c.train.arch.input_channels)),
        count_field("output_channels", DG_M(c.train.arch.output_channels)),
        bool_field("skip_connections", DG_M(c.train.arch.skip_connections)),
        real_field("leaky_slope", DG_M(c.train.arch.leaky_slope)),
        // AugmentSpec
        {"rotation_degrees",
         [](const RunConfig& c) {
             std::string s;
             for (double d : c.augment.rotation_degrees) s += (s.empty() ? "" : ",") + fmt_double(d);
             return s;
         },
         [](RunConfig& c, const std::string& v) {
             c.augment.rotation_degrees.clear();
             std::stringstream ss(v);
             std::string item;
             while (std::getline(ss, item, ',')) {
                 item = trim(item);
                 if (!item.empty()) c.augment.rotation_degrees.push_back(parse_double("rotation_degrees", item));
             }
         }},
        bool_field("allow_hflip", DG_M(c.augment.allow_hflip)),
        bool_field("allow_vflip", DG_M(c.augment.allow_vflip)),
        int_field("max_translate", DG_M(c.augment.max_translate)),
        real_field("intensity_delta", DG_M(c.augment.intensity_delta)),
        int_field("expansion_factor", DG_M(c.augment.expansion_factor)),
        // PhantomSpec
        count_field("phantom_image_size", DG_M(c.phantom.image_size)),
        int_field("teeth_min", DG_M(c.phantom.teeth_count_range.first)),
        int_field("teeth_max", DG_M(c.phantom.teeth_count_range.second)),
        real_field("p_caries", DG_M(c.phantom.p_caries)),
        real_field("p_crown", DG_M(c.phantom.p_crown)),
        real_field("p_restoration", DG_M(c.phantom.p_restoration)),
        real_field("p_root_canal", DG_M(c.phantom.p_root_canal)),
        real_field("noise_sigma", DG_M(c.phantom.noise_sigma)),
        int_field("blur_radius", DG_M(c.phantom.blur_radius)),
        // Paths
        text_field("data_dir", DG_M(c.data_dir)),
        text_field("out_dir", DG_M(c.out_dir)),
    };
    return f;
}

#undef DG_M

}  // namespace config_detail

/// Recognized keys, in serialization order.
inline std::vector<std::string> config_keys() {
    std::vector<std::string> k;
    for (const auto& f : config_detail::fields()) k.emplace_back(f.key);
    return k;
}

inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& f : config_detail::fields()) {
        if (f.key == key) {
            f.set(cfg, value);
            return;
        }
    }
    throw InvalidConfig("unknown key '" + key + "'");
}

inline std::string get_config_value(const RunConfig& cfg, const std::string& key) {
    for (const auto& f : config_detail::fields()) {
        if (f.key == key) return f.get(cfg);
    }
    throw InvalidConfig("unknown key '" + key + "'");
}

/// Applies `key = value` lines on top of `cfg`. '#' starts a comment.
inline void apply_config_text(RunConfig& cfg, const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = config_detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidConfig("line " + std::to_string(lineno) + ": expected key = value");
        const auto key = config_detail::trim(std::string_view(line).substr(0, eq));
        const auto value = config_detail::trim(std::string_view(line).substr(eq + 1));
        try {
            set_config_value(cfg, key, value);
        } catch (const InvalidConfig& e) {
            throw InvalidConfig("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    apply_config_text(cfg, text);
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Fully resolved config; parse_config(serialize_config(c)) reproduces c.
inline std::string serialize_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& f : config_detail::fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
    return out;
}

/// Only the keys that shape the networks, in a fixed order. Two checkpoints
/// are compatible iff these strings match.
inline std::string arch_signature(const ArchConfig& a) {
    RunConfig c;
    c.train.arch = a;
    std::string out;
    for (const char* k : {"image_size", "depth", "base_width", "input_channels", "output_channels", "skip_connections",
                          "leaky_slope"}) {
        out += std::string(k) + " = " + get_config_value(c, k) + "\n";
    }
    return out;
}

}  // namespace dentgan
