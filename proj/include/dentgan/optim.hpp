#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "network.hpp"

namespace dentgan {

struct AdamConfig {
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename T>
struct AdamMoments {
    std::vector<T> m, v;
};

/// One bias-corrected Adam update at step t (t >= 1).
template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamMoments<T>& mom, std::uint64_t t,
               const AdamConfig& cfg) {
    if (mom.m.size() != param.size()) {
        mom.m.assign(param.size(), T{0});
        mom.v.assign(param.size(), T{0});
    }
    const double c1 = 1.0 - std::pow(cfg.beta1, double(t));
    const double c2 = 1.0 - std::pow(cfg.beta2, double(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        const double m = cfg.beta1 * mom.m[i] + (1.0 - cfg.beta1) * g;
        const double v = cfg.beta2 * mom.v[i] + (1.0 - cfg.beta2) * g * g;
        mom.m[i] = static_cast<T>(m);
        mom.v[i] = static_cast<T>(v);
        const double mhat = m / c1, vhat = v / c2;
        param[i] = static_cast<T>(param[i] - cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon));
    }
}

/// Adam state for every trainable tensor of one network, keyed by name.
template <typename T>
struct Adam {
    AdamConfig cfg;
    std::uint64_t t = 0;
    std::map<std::string, AdamMoments<T>> moments;

    void step(Network<T>& net) {
        ++t;
        net.for_each_parameter([&](const std::string& name, std::vector<T>& p, std::vector<T>& g) {
            adam_step<T>(p, g, moments[name], t, cfg);
        });
    }
};

}  // namespace dentgan
