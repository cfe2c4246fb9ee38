#include <gtest/gtest.h>

#include <filesystem>

#include "dentgan/data_pipeline.hpp"
#include "dentgan/phantom.hpp"
#include "oracles.hpp"

using namespace dentgan;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("dentgan_pipeline_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

PhantomSpec small_spec() {
    PhantomSpec s;
    s.image_size = 48;
    return s;
}

SamplePair tiny_pair(std::vector<std::uint8_t> classes, std::size_t w, std::size_t h) {
    SamplePair p{"tiny", GrayImage(w, h), IndexMask(w, h)};
    p.mask.data = std::move(classes);
    for (std::size_t i = 0; i < p.mask.data.size(); ++i) p.radiograph.data[i] = std::uint8_t(40 * p.mask.data[i]);
    return p;
}

Transform only(double degrees, bool hflip = false, bool vflip = false) {
    Transform t;
    t.degrees = degrees;
    t.hflip = hflip;
    t.vflip = vflip;
    return t;
}

}  // namespace

TEST(LoadPairs, EmptyDirs) {
    const auto d = fresh_dir("empty");
    fs::create_directories(d / "images");
    fs::create_directories(d / "masks");
    EXPECT_TRUE(load_pairs(d / "images", d / "masks", default_palette()).empty());
}

TEST(LoadPairs, RoundTripsGeneratedPairs) {
    const auto d = fresh_dir("roundtrip");
    const auto pairs = generate_dataset(3, small_spec(), 3);
    write_pairs(d, pairs, default_palette());
    const auto back = load_pairs(d / "images", d / "masks", default_palette());
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back[i].id, pairs[i].id);
        EXPECT_EQ(back[i].mask, pairs[i].mask);
        EXPECT_EQ(back[i].radiograph, pairs[i].radiograph);
    }
}

TEST(LoadPairs, MissingMask) {
    const auto d = fresh_dir("missing");
    write_pairs(d, generate_dataset(1, small_spec(), 2), default_palette());
    fs::remove(d / "masks" / "phantom-1-1.png");
    EXPECT_THROW(load_pairs(d / "images", d / "masks", default_palette()), MissingMask);
}

TEST(LoadPairs, OffPaletteMaskRejected) {
    const auto d = fresh_dir("offpalette");
    auto pairs = generate_dataset(1, small_spec(), 1);
    write_pairs(d, pairs, default_palette());
    RgbImage bad(48, 48, 7);
    png::write(d / "masks" / (pairs[0].id + ".png"), bad);
    EXPECT_THROW(load_pairs(d / "images", d / "masks", default_palette()), UnknownColor);
}

TEST(Resize, SameSizeUnchanged) {
    const auto p = generate_phantom(2, small_spec());
    EXPECT_EQ(resize_pair(p, 48), p);
}

TEST(Resize, ConstantMaskStaysConstant) {
    SamplePair p{"c", GrayImage(512, 512, 90), IndexMask(512, 512, kDentin)};
    const auto r = resize_pair(p, 256);
    EXPECT_EQ(r.mask, IndexMask(256, 256, kDentin));
    EXPECT_EQ(r.radiograph, GrayImage(256, 256, 90));
}

TEST(Resize, NearestAtPixelCenters) {
    // Output centers 0.5 and 1.5 map to source 1.0 and 3.0: columns/rows 1 and 3.
    IndexMask m(4, 4);
    m.data = {0, 1, 2, 3,  //
              4, 5, 6, 7,  //
              1, 2, 3, 4,  //
              5, 6, 7, 0};
    const auto r = resize_nearest(m, 2, 2);
    const std::vector<std::uint8_t> want = {5, 7, 6, 0};
    EXPECT_EQ(r.data, want);
}

TEST(Augment, IdentitySpec) {
    const auto p = generate_phantom(5, small_spec());
    const auto spec = AugmentSpec::identity();
    for (std::uint64_t s = 0; s < 5; ++s) EXPECT_EQ(augment(p, spec, s), p);
}

TEST(Augment, Rotate90) {
    const auto p = tiny_pair({1, 2, 3, 4}, 2, 2);
    const auto r = apply_transform(p, only(90));
    const std::vector<std::uint8_t> want = {3, 1, 4, 2};
    EXPECT_EQ(r.mask.data, want);
    // the radiograph moves with the mask
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(r.radiograph.data[i], 40 * r.mask.data[i]);
}

TEST(Augment, FlipIsInvolution) {
    const auto p = generate_phantom(6, small_spec());
    for (const auto& t : {only(0, true, false), only(0, false, true), only(0, true, true)}) {
        EXPECT_EQ(apply_transform(apply_transform(p, t), t), p);
    }
}

TEST(Augment, ForcedFlipSpecTwice) {
    const auto p = generate_phantom(6, small_spec());
    AugmentSpec spec = AugmentSpec::identity();
    spec.allow_hflip = true;
    Rng rng(1);
    // find a draw that flips, then apply it twice
    Transform t;
    do t = sample_transform(spec, rng);
    while (!t.hflip);
    EXPECT_EQ(apply_transform(apply_transform(p, t), t), p);
}

TEST(Augment, QuarterTurnsCompose) {
    const auto p = generate_phantom(8, small_spec());
    auto r = p;
    for (int i = 0; i < 4; ++i) r = apply_transform(r, only(90));
    EXPECT_EQ(r, p);
    EXPECT_EQ(apply_transform(apply_transform(p, only(90)), only(90)), apply_transform(p, only(180)));
}

TEST(Augment, MasksStayOnPalette) {
    const auto p = generate_phantom(9, small_spec());
    AugmentSpec spec;
    spec.max_translate = 8;
    for (std::uint64_t s = 0; s < 20; ++s) EXPECT_NO_THROW(validate_mask(augment(p, spec, s).mask));
}

TEST(Augment, DeterministicPerSeed) {
    const auto p = generate_phantom(10, small_spec());
    AugmentSpec spec;
    spec.max_translate = 8;
    EXPECT_EQ(augment(p, spec, 4), augment(p, spec, 4));
}

TEST(Expand, FactorCounts) {
    const auto pairs = generate_dataset(1, small_spec(), 5);
    AugmentSpec spec;
    spec.max_translate = 8;
    spec.expansion_factor = 360;
    const auto ds = expand_dataset(pairs, spec, 2);
    ASSERT_EQ(ds.pairs.size(), 1800u);
    EXPECT_EQ(ds.input_size, 48u);
    for (std::size_t i = 0; i < pairs.size(); ++i) EXPECT_EQ(ds.pairs[i * 360], pairs[i]);
    EXPECT_EQ(ds.pairs[1].id, pairs[0].id + "-aug1");
    for (const auto& p : ds.pairs) validate_mask(p.mask);
}

TEST(Expand, FactorOneIsInput) {
    const auto pairs = generate_dataset(1, small_spec(), 3);
    AugmentSpec spec;
    spec.max_translate = 8;
    spec.expansion_factor = 1;
    EXPECT_EQ(expand_dataset(pairs, spec, 0).pairs, pairs);
}

TEST(Expand, PaperScaleArithmetic) {
    // 80 pairs at factor 360 give 28 800 entries; checked on tiny images.
    std::vector<SamplePair> pairs;
    for (int i = 0; i < 80; ++i) pairs.push_back({"p" + std::to_string(i), GrayImage(4, 4), IndexMask(4, 4)});
    AugmentSpec spec = AugmentSpec::identity();
    spec.expansion_factor = 360;
    EXPECT_EQ(expand_dataset(pairs, spec, 0).pairs.size(), 28800u);
}

TEST(Expand, RejectsMixedSizes) {
    std::vector<SamplePair> pairs{{"a", GrayImage(4, 4), IndexMask(4, 4)}, {"b", GrayImage(5, 5), IndexMask(5, 5)}};
    EXPECT_THROW(expand_dataset(pairs, AugmentSpec::identity(), 0), DimensionMismatch);
}
