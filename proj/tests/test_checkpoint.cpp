#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dentgan/checkpoint.hpp"
#include "dentgan/trainer.hpp"

using namespace dentgan;
namespace fs = std::filesystem;

namespace {

Checkpoint sample_checkpoint() {
    Checkpoint c;
    c.step = 50;
    c.epoch = 2;
    c.seed = 7;
    c.adam_steps_g = 50;
    c.adam_steps_d = 50;
    c.config = "image_size = 64\n";
    c.tensors["G/e1.weight"] = {1.5f, -0.0f, 3.25e-30f, std::numeric_limits<float>::denorm_min()};
    c.tensors["D/out.bias"] = {0.125f};
    c.tensors["empty"] = {};
    return c;
}

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("dentgan_ckpt_" + name); }

void dump(const fs::path& p, const std::vector<unsigned char>& b) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size()));
}

}  // namespace

TEST(Checkpoint, SaveLoadBitIdentical) {
    const auto c = sample_checkpoint();
    const auto p = tmp("roundtrip.bin");
    save_checkpoint(p, c);
    const auto back = load_checkpoint(p);
    EXPECT_EQ(back, c);
    const auto& t = back.tensors.at("G/e1.weight");
    EXPECT_TRUE(std::signbit(t[1]));
    EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(c));
}

TEST(Checkpoint, TruncatedIsCorrupt) {
    const auto bytes = encode_checkpoint(sample_checkpoint());
    for (std::size_t keep : {std::size_t{0}, std::size_t{5}, std::size_t{16}, bytes.size() / 2, bytes.size() - 1}) {
        std::vector<unsigned char> cut(bytes.begin(), bytes.begin() + std::ptrdiff_t(keep));
        EXPECT_THROW(decode_checkpoint(cut), CorruptChecksum) << keep;
    }
    const auto p = tmp("truncated.bin");
    dump(p, std::vector<unsigned char>(bytes.begin(), bytes.end() - 3));
    EXPECT_THROW(load_checkpoint(p), CorruptChecksum);
}

TEST(Checkpoint, FlippedBitIsCorrupt) {
    auto bytes = encode_checkpoint(sample_checkpoint());
    bytes[bytes.size() / 2] ^= 0x10;
    EXPECT_THROW(decode_checkpoint(bytes), CorruptChecksum);
}

TEST(Checkpoint, ForeignFileIsVersionMismatch) {
    // valid trailer over a wrong magic
    std::vector<unsigned char> b{'P', 'K', 3, 4, 0, 0, 0, 0, 1, 0, 0, 0};
    const auto crc = static_cast<std::uint32_t>(::crc32(::crc32(0L, Z_NULL, 0), b.data(), uInt(b.size())));
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(crc >> (8 * i)));
    EXPECT_THROW(decode_checkpoint(b), VersionMismatch);
}

TEST(Checkpoint, MissingFileIsIoError) { EXPECT_THROW(load_checkpoint(tmp("does-not-exist.bin")), IoError); }

TEST(Checkpoint, DifferentArchRefusedForTraining) {
    TrainConfig cfg;
    cfg.arch = ArchConfig::tiny();
    auto state = init_state(cfg);
    RunConfig rc;
    rc.train = cfg;
    const auto ck = make_checkpoint(state, 10, serialize_config(rc));
    EXPECT_NO_THROW(restore_state(ck, cfg));
    TrainConfig other = cfg;
    other.arch.base_width = 16;
    EXPECT_THROW(restore_state(ck, other), VersionMismatch);
}

TEST(Checkpoint, RestoreReproducesState) {
    TrainConfig cfg;
    cfg.arch = ArchConfig::tiny();
    auto state = init_state(cfg);
    RunConfig rc;
    rc.train = cfg;
    const auto ck = make_checkpoint(state, 10, serialize_config(rc));
    auto back = restore_state(ck, cfg);
    RunConfig rc2 = rc;
    EXPECT_EQ(encode_checkpoint(make_checkpoint(back, 10, serialize_config(rc2))), encode_checkpoint(ck));
    auto g = load_generator(ck);
    std::vector<float> a, b;
    g.for_each_tensor([&](const std::string&, const std::vector<float>& v) { a.insert(a.end(), v.begin(), v.end()); });
    state.generator.for_each_tensor(
        [&](const std::string&, const std::vector<float>& v) { b.insert(b.end(), v.begin(), v.end()); });
    EXPECT_EQ(a, b);
}
