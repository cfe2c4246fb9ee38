#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "errors.hpp"

namespace dentgan::losses {

inline constexpr double kProbEps = 1e-7;

struct LossWeights {
    double lambda_l1 = 100.0;

    void validate() const {
        if (!std::isfinite(lambda_l1) || lambda_l1 < 0) throw InvalidConfig("lambda_l1 must be finite and >= 0");
    }
};

/// Binary cross-entropy on a probability clamped to [eps, 1 - eps].
inline double bce(double prob, double target) {
    const double p = std::clamp(prob, kProbEps, 1.0 - kProbEps);
    return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

/// d bce / d prob; zero where the clamp is active.
inline double bce_grad(double prob, double target) {
    if (prob < kProbEps || prob > 1.0 - kProbEps) return 0.0;
    return -target / prob + (1.0 - target) / (1.0 - prob);
}

template <typename T>
double mean_bce(std::span<const T> probs, double target) {
    double s = 0;
    for (T p : probs) s += bce(p, target);
    return s / static_cast<double>(probs.size());
}

/// Discriminator loss: real pairs toward 1, generated pairs toward 0, each
/// averaged over the batch.
template <typename T>
double d_loss(std::span<const T> d_real, std::span<const T> d_fake) {
    return mean_bce(d_real, 1.0) + mean_bce(d_fake, 0.0);
}

inline double d_loss(double d_real, double d_fake) { return bce(d_real, 1.0) + bce(d_fake, 0.0); }

/// Non-saturating generator objective: -log D(x, G(x)).
template <typename T>
double g_adv_loss(std::span<const T> d_fake) {
    return mean_bce(d_fake, 1.0);
}

inline double g_adv_loss(double d_fake) { return bce(d_fake, 1.0); }

/// Mean absolute difference.
template <typename T>
double l1_loss(std::span<const T> target, std::span<const T> generated) {
    if (target.size() != generated.size()) {
        throw ShapeMismatch("l1_loss: " + std::to_string(target.size()) + " vs " + std::to_string(generated.size()));
    }
    if (target.empty()) return 0.0;
    double s = 0;
    for (std::size_t i = 0; i < target.size(); ++i) s += std::abs(double(target[i]) - double(generated[i]));
    return s / static_cast<double>(target.size());
}

/// d l1 / d generated, scaled by `scale`. Subgradient 0 at equality.
template <typename T>
void l1_grad(std::span<const T> target, std::span<const T> generated, double scale, std::span<T> out) {
    const double k = scale / static_cast<double>(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = double(generated[i]) - double(target[i]);
        out[i] += static_cast<T>(d > 0 ? k : (d < 0 ? -k : 0.0));
    }
}

inline double g_total(double adv, double l1, const LossWeights& w) { return adv + w.lambda_l1 * l1; }

template <typename T>
double g_total_loss(std::span<const T> d_fake, std::span<const T> target, std::span<const T> generated,
                    const LossWeights& w) {
    return g_total(g_adv_loss(d_fake), l1_loss(target, generated), w);
}

}  // namespace dentgan::losses
