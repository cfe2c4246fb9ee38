#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dentgan/phantom.hpp"
#include "dentgan/trainer.hpp"

using namespace dentgan;
namespace fs = std::filesystem;

namespace {

TrainConfig small_config() {
    TrainConfig c;
    c.arch.image_size = 32;
    c.arch.depth = 4;
    c.arch.base_width = 4;
    c.epochs = 1000;
    c.checkpoint_every = 0;
    c.seed = 11;
    return c;
}

Dataset small_data(std::size_t n, std::uint64_t seed = 5) {
    PhantomSpec ps;
    ps.image_size = 32;
    return {generate_dataset(seed, ps, n), 32};
}

FitOptions stop_at(std::uint64_t step) {
    FitOptions o;
    o.stop_after_step = step;
    return o;
}

std::vector<float> all_params(TrainState& s) {
    std::vector<float> out;
    for (auto* net : {&s.generator, &s.discriminator}) {
        net->for_each_tensor([&](const std::string&, const std::vector<float>& v) { out.insert(out.end(), v.begin(), v.end()); });
    }
    return out;
}

fs::path fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("dentgan_trainer_" + name);
    fs::remove_all(p);
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Trainer, StepsPerEpoch) {
    EXPECT_EQ(steps_per_epoch(28800, 2), 14400u);
    EXPECT_EQ(steps_per_epoch(5, 2), 2u);
}

TEST(Trainer, EpochOrderIsSeededPermutation) {
    const auto a = epoch_order(10, 3, 0), b = epoch_order(10, 3, 0), c = epoch_order(10, 3, 1);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Trainer, ZeroEpochsIsEmptyReport) {
    auto cfg = small_config();
    cfg.epochs = 0;
    const auto r = fit(small_data(2), cfg);
    EXPECT_TRUE(r.report.steps.empty());
    EXPECT_TRUE(r.report.epochs.empty());
    EXPECT_EQ(r.state.step, 0u);
}

TEST(Trainer, InputErrors) {
    const auto cfg = small_config();
    EXPECT_THROW(fit(Dataset{}, cfg), EmptyDataset);
    PhantomSpec ps;
    ps.image_size = 64;
    EXPECT_THROW(fit(Dataset{generate_dataset(1, ps, 2), 64}, cfg), DimensionMismatch);
    EXPECT_THROW(fit(small_data(1), cfg), EmptyDataset);  // fewer pairs than the batch
}

TEST(Trainer, SameSeedSameRun) {
    const auto data = small_data(4);
    const auto cfg = small_config();
    auto a = fit(data, cfg, {}, stop_at(6));
    auto b = fit(data, cfg, {}, stop_at(6));
    ASSERT_EQ(a.report.steps.size(), 6u);
    EXPECT_EQ(a.report.steps, b.report.steps);
    EXPECT_EQ(all_params(a.state), all_params(b.state));
    auto other = cfg;
    other.seed = 12;
    auto c = fit(data, other, {}, stop_at(6));
    EXPECT_NE(c.report.steps, a.report.steps);
}

TEST(Trainer, EpochSummariesAverageSteps) {
    const auto r = fit(small_data(4), small_config(), {}, stop_at(5));
    ASSERT_EQ(r.report.epochs.size(), 3u);  // 2 steps per epoch
    EXPECT_EQ(r.report.epochs[0].steps, 2u);
    EXPECT_EQ(r.report.epochs[2].steps, 1u);
    EXPECT_DOUBLE_EQ(r.report.epochs[0].g_l1, (r.report.steps[0].g_l1 + r.report.steps[1].g_l1) / 2);
    for (const auto& s : r.report.steps) EXPECT_NEAR(s.g_total, s.g_adv + 100.0 * s.g_l1, 1e-4 * s.g_total);
}

TEST(Trainer, FreezeContractHolds) {
    auto o = stop_at(3);
    o.verify_freeze = true;
    EXPECT_NO_THROW(fit(small_data(2), small_config(), {}, o));
}

TEST(Trainer, ResumeIsBitIdentical) {
    const auto data = small_data(4);
    auto cfg = small_config();
    cfg.checkpoint_every = 3;
    const auto dir = fresh_dir("resume");
    FitOptions o = stop_at(6);
    o.out_dir = dir;
    auto full = fit(data, cfg, {}, o);
    ASSERT_TRUE(fs::exists(dir / "ckpt-3.bin"));
    ASSERT_TRUE(fs::exists(dir / "ckpt-6.bin"));

    const auto mid = load_checkpoint(dir / "ckpt-3.bin");
    EXPECT_EQ(mid.step, 3u);
    auto rest = fit(data, cfg, mid, stop_at(6));
    ASSERT_EQ(rest.report.steps.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(rest.report.steps[i], full.report.steps[3 + i]);
    EXPECT_EQ(all_params(rest.state), all_params(full.state));
    EXPECT_EQ(encode_checkpoint(make_checkpoint(rest.state, 2, load_checkpoint(dir / "ckpt-6.bin").config)),
              encode_checkpoint(load_checkpoint(dir / "ckpt-6.bin")));
}

TEST(Trainer, LossesCsvKeepsPriorRowsOnResume) {
    const auto dir = fresh_dir("csv");
    fs::create_directories(dir);
    const auto p = dir / "losses.csv";
    std::vector<StepLosses> first{{1, 1.0, 2.0, 0.5, 52.0}, {2, 0.9, 2.1, 0.4, 42.1}, {3, 0.8, 2.2, 0.3, 32.2}};
    write_losses_csv(p, first);
    write_losses_csv(p, {{3, 0.7, 2.3, 0.2, 22.3}}, 2);
    const auto text = read_file(p);
    EXPECT_EQ(text, losses_csv_header() + losses_csv_row(first[0]) + losses_csv_row(first[1]) +
                        losses_csv_row({3, 0.7, 2.3, 0.2, 22.3}));
}

TEST(Trainer, RepeatedPairLowersL1) {
    auto data = small_data(1);
    data.pairs.push_back(data.pairs[0]);
    const auto r = fit(data, small_config(), {}, stop_at(200));
    ASSERT_EQ(r.report.steps.size(), 200u);
    double head = 0, tail = 0;
    for (std::size_t i = 0; i < 10; ++i) {
        head += r.report.steps[i].g_l1;
        tail += r.report.steps[190 + i].g_l1;
    }
    EXPECT_LT(tail, head);
}

TEST(Trainer, PredictMaskIsDeterministic) {
    auto s = init_state(small_config());
    const auto data = small_data(1);
    const auto pal = default_palette();
    const auto a = predict_mask(s.generator, data.pairs[0].radiograph, pal);
    const auto b = predict_mask(s.generator, data.pairs[0].radiograph, pal);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.width, 32u);
}
