#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "dentgan/cli.hpp"
#include "dentgan/png_io.hpp"
#include "dentgan/trainer.hpp"

using namespace dentgan;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("dentgan_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
    }
    return out;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

const char* kSmallConfig =
    "image_size = 32\n"
    "depth = 4\n"
    "base_width = 4\n"
    "epochs = 1\n"
    "batch_size = 2\n"
    "checkpoint_every = 0\n"
    "expansion_factor = 1\n"
    "max_translate = 2\n"
    "phantom_image_size = 32\n";

std::size_t count_rows(const std::string& block) {
    std::istringstream is(block);
    std::string line;
    std::size_t n = 0;
    bool table = false;
    while (std::getline(is, line)) {
        if (line.rfind("input ", 0) == 0) break;
        if (table && !line.empty() && line[0] != '-') ++n;
        if (line.rfind("op ", 0) == 0) table = true;
    }
    return n;
}

}  // namespace

TEST(Cli, NoArgumentsIsUsageError) {
    const auto r = run({});
    EXPECT_EQ(r.code, cli::kUsage);
    EXPECT_NE(r.err.find("gen-phantoms"), std::string::npos);
    EXPECT_EQ(std::system(DENTGAN_CLI_PATH " > /dev/null 2>&1") >> 8, 1);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, cli::kOk); }

TEST(Cli, UnknownSubcommandIsUsageError) { EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage); }

TEST(Cli, InspectArchPaper) {
    const auto r = run({"inspect-arch", "--preset", "paper"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto g = r.out.find("Generator (17 layers");
    const auto d = r.out.find("Discriminator (6 layers");
    ASSERT_NE(g, std::string::npos) << r.out;
    ASSERT_NE(d, std::string::npos) << r.out;
    EXPECT_EQ(count_rows(r.out.substr(g, d - g)), 17u);
    EXPECT_EQ(count_rows(r.out.substr(d)), 6u);
    EXPECT_NE(r.out.find("16*16*512"), std::string::npos);
    EXPECT_NE(r.out.find("input 256x256x1 -> output 256x256x3"), std::string::npos) << r.out;
}

TEST(Cli, GenPhantomsIsReproducible) {
    const auto a = fresh_dir("gen_a"), b = fresh_dir("gen_b");
    for (const auto& d : {a, b}) {
        ASSERT_EQ(run({"gen-phantoms", "--n", "3", "--seed", "3", "--out", d.string(), "--size", "32"}).code, 0);
    }
    const auto ta = tree(a);
    EXPECT_EQ(ta.size(), 7u);  // 3 images, 3 masks, config echo
    EXPECT_TRUE(ta.count("config.txt"));
    EXPECT_EQ(ta, tree(b));
    EXPECT_EQ(run({"gen-phantoms", "--n", "0", "--out", a.string()}).code, cli::kUsage);
}

TEST(Cli, AugmentExpandsDirectory) {
    const auto src = fresh_dir("aug_src"), dst = fresh_dir("aug_dst");
    ASSERT_EQ(run({"gen-phantoms", "--n", "2", "--out", src.string(), "--size", "32"}).code, 0);
    const auto cfg = src / "aug.cfg";
    write(cfg, "max_translate = 2\n");
    const auto r = run({"augment", "--data", src.string(), "--out", dst.string(), "--factor", "3", "--config", cfg.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::size_t images = 0;
    for (const auto& e : fs::directory_iterator(dst / "images")) images += e.is_regular_file();
    EXPECT_EQ(images, 6u);
    EXPECT_TRUE(fs::exists(dst / "config.txt"));
}

TEST(Cli, BadConfigIsRuntimeError) {
    const auto d = fresh_dir("badcfg");
    fs::create_directories(d);
    write(d / "bad.cfg", "learnig_rate = 1\n");
    const auto r = run({"inspect-arch", "--config", (d / "bad.cfg").string()});
    EXPECT_EQ(r.code, cli::kRuntime);
    EXPECT_NE(r.err.find("learnig_rate"), std::string::npos);
}

TEST(Cli, ZeroCheckpointInfersConstantMask) {
    const auto d = fresh_dir("zero");
    ASSERT_EQ(run({"gen-phantoms", "--n", "2", "--out", (d / "data").string(), "--size", "32"}).code, 0);
    RunConfig rc = parse_config(kSmallConfig);
    auto s = init_state(rc.train);
    s.generator.for_each_tensor([](const std::string&, std::vector<float>& v) { std::fill(v.begin(), v.end(), 0.0f); });
    const auto ck = d / "zero.bin";
    save_checkpoint(ck, make_checkpoint(s, 1, serialize_config(rc)));

    for (const char* out : {"p1", "p2"}) {
        const auto r = run({"infer", "--checkpoint", ck.string(), "--images", (d / "data" / "images").string(), "--out",
                            (d / out).string()});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    const auto t1 = tree(d / "p1");
    EXPECT_EQ(t1, tree(d / "p2"));
    // tanh(0) decodes to mid-grey (128,128,128); crown is the nearest colour
    const auto pal = default_palette();
    for (const auto& [name, bytes] : t1) {
        if (name == "config.txt") continue;
        const auto mask = encode_mask(png::read_rgb(d / "p1" / name), pal, 0);
        for (auto v : mask.data) ASSERT_EQ(v, kCrown) << name;
    }
}

TEST(Cli, TrainInferEvaluatePipeline) {
    const auto d = fresh_dir("pipeline");
    ASSERT_EQ(run({"gen-phantoms", "--n", "4", "--seed", "1", "--out", (d / "data").string(), "--size", "32"}).code, 0);
    write(d / "small.cfg", kSmallConfig);
    const auto t = run({"train", "--config", (d / "small.cfg").string(), "--data", (d / "data").string(), "--out",
                        (d / "run").string(), "--seed", "4"});
    ASSERT_EQ(t.code, 0) << t.err;
    const auto csv = read_file(d / "run" / "losses.csv");
    EXPECT_EQ(csv.rfind(losses_csv_header(), 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);  // header + 2 steps
    ASSERT_TRUE(fs::exists(d / "run" / "ckpt-2.bin"));
    EXPECT_NE(read_file(d / "run" / "config.txt").find("seed = 4"), std::string::npos);
    EXPECT_EQ(load_checkpoint(d / "run" / "ckpt-2.bin").config.find(d.string()), std::string::npos);

    ASSERT_EQ(run({"infer", "--checkpoint", (d / "run" / "ckpt-2.bin").string(), "--images",
                   (d / "data" / "images").string(), "--out", (d / "preds").string()})
                  .code,
              0);
    const auto e = run({"evaluate", "--pred", (d / "preds").string(), "--gt", (d / "data" / "masks").string(),
                        "--format", "csv", "--out", (d / "metrics.csv").string()});
    ASSERT_EQ(e.code, 0) << e.err;
    const auto rows = metrics::parse_csv(read_file(d / "metrics.csv"));
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(rows[0].name, "caries");

    // self-evaluation is perfect
    const auto self = run({"evaluate", "--pred", (d / "data" / "masks").string(), "--gt",
                           (d / "data" / "masks").string()});
    ASSERT_EQ(self.code, 0);
    EXPECT_NE(self.out.find("1.000"), std::string::npos);
}

TEST(Cli, EvaluateMissingPredictionIsRuntimeError) {
    const auto d = fresh_dir("missing");
    ASSERT_EQ(run({"gen-phantoms", "--n", "2", "--out", d.string(), "--size", "32"}).code, 0);
    fs::create_directories(d / "preds");
    const auto r = run({"evaluate", "--pred", (d / "preds").string(), "--gt", (d / "masks").string()});
    EXPECT_EQ(r.code, cli::kRuntime);
}
