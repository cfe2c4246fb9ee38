#include <gtest/gtest.h>

#include <cmath>

#include "dentgan/optim.hpp"

using namespace dentgan;

TEST(Adam, DefaultsAreTrainingDefaults) {
    const AdamConfig c;
    EXPECT_EQ(c.learning_rate, 2e-4);
    EXPECT_EQ(c.beta1, 0.5);
    EXPECT_EQ(c.beta2, 0.999);
    EXPECT_EQ(c.epsilon, 1e-8);
}

TEST(Adam, FirstStepIsSignStep) {
    std::vector<double> p{1.0};
    const std::vector<double> g{2.0};
    AdamMoments<double> m;
    adam_step<double>(p, g, m, 1, {});
    EXPECT_NEAR(p[0], 0.9998, 1e-11);
    EXPECT_DOUBLE_EQ(p[0], 1.0 - 2e-4 * 2.0 / (2.0 + 1e-8));
}

TEST(Adam, ZeroGradientNoMove) {
    std::vector<double> p{0.37};
    const std::vector<double> g{0.0};
    AdamMoments<double> m;
    adam_step<double>(p, g, m, 1, {});
    EXPECT_EQ(p[0], 0.37);
}

TEST(Adam, TwoStepsHandRolled) {
    const AdamConfig c;
    std::vector<double> p{0.0};
    const std::vector<double> g{1.0};
    AdamMoments<double> mom;
    double want = 0.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 2; ++t) {
        adam_step<double>(p, g, mom, t, c);
        m = c.beta1 * m + (1 - c.beta1) * 1.0;
        v = c.beta2 * v + (1 - c.beta2) * 1.0;
        const double mh = m / (1 - std::pow(c.beta1, t)), vh = v / (1 - std::pow(c.beta2, t));
        want -= c.learning_rate * mh / (std::sqrt(vh) + c.epsilon);
    }
    EXPECT_DOUBLE_EQ(p[0], want);
    EXPECT_NEAR(p[0], -4e-4, 1e-11);
}

TEST(Adam, StepsEveryNamedTensor) {
    LayerSpec l;
    l.name = "c";
    l.in_channels = 1;
    l.out_channels = 2;
    l.batch_norm = true;
    Network<float> net("n", {l}, {1, 8, 8}, 0.2f);
    for (auto& g : net.grads()[0].weight) g = 1.0f;
    Adam<float> opt;
    opt.step(net);
    EXPECT_EQ(opt.t, 1u);
    EXPECT_EQ(opt.moments.size(), 4u);  // weight, bias, gamma, beta
    for (float w : net.params()[0].weight) EXPECT_NEAR(w, -2e-4f, 1e-9f);
    for (float b : net.params()[0].bias) EXPECT_EQ(b, 0.0f);
}
