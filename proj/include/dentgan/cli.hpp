#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 runtime
// error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "config.hpp"
#include "data_pipeline.hpp"
#include "label_codec.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "phantom.hpp"
#include "png_io.hpp"
#include "trainer.hpp"

namespace dentgan::cli {

namespace fs = std::filesystem;

inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kRuntime = 2;

inline constexpr const char* kConfigEcho = "config.txt";

inline void write_text(const fs::path& p, const std::string& s) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << s;
}

inline RunConfig base_config(const std::string& config_path) {
    return config_path.empty() ? RunConfig{} : load_config(config_path);
}

inline std::vector<fs::path> png_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return out;
}

// ---------------------------------------------------------------------------
// Subcommands

struct GenPhantomsArgs {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string out, config;
    std::optional<std::size_t> size;
};

inline int gen_phantoms(const GenPhantomsArgs& a, std::ostream& out) {
    RunConfig cfg = base_config(a.config);
    if (a.size) cfg.phantom.image_size = *a.size;
    cfg.train.seed = a.seed;
    const auto pairs = generate_dataset(a.seed, cfg.phantom, a.n);
    write_pairs(a.out, pairs, default_palette());
    write_text(fs::path(a.out) / kConfigEcho, serialize_config(cfg));
    out << "wrote " << pairs.size() << " phantom pairs to " << a.out << "\n";
    return kOk;
}

struct AugmentArgs {
    std::string data, out, config;
    std::optional<int> factor;
    std::uint64_t seed = 0;
};

inline int augment_cmd(const AugmentArgs& a, std::ostream& out) {
    RunConfig cfg = base_config(a.config);
    if (a.factor) cfg.augment.expansion_factor = *a.factor;
    cfg.train.seed = a.seed;
    const auto palette = default_palette();
    const auto pairs = load_pairs(fs::path(a.data) / "images", fs::path(a.data) / "masks", palette);
    const auto ds = expand_dataset(pairs, cfg.augment, a.seed);
    write_pairs(a.out, ds.pairs, palette);
    write_text(fs::path(a.out) / kConfigEcho, serialize_config(cfg));
    out << "expanded " << pairs.size() << " pairs to " << ds.pairs.size() << " in " << a.out << "\n";
    return kOk;
}

struct TrainArgs {
    std::string config, data, out, resume;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> max_steps;
};

inline int train_cmd(const TrainArgs& a, std::ostream& out) {
    RunConfig cfg = base_config(a.config);
    if (a.seed) cfg.train.seed = *a.seed;
    cfg.data_dir = a.data;
    cfg.out_dir = a.out;
    cfg.train.validate();
    const auto palette = default_palette();
    const auto raw = load_pairs(fs::path(a.data) / "images", fs::path(a.data) / "masks", palette);
    std::vector<SamplePair> sized;
    sized.reserve(raw.size());
    for (const auto& p : raw) sized.push_back(resize_pair(p, cfg.train.arch.image_size));
    const Dataset ds = expand_dataset(sized, cfg.augment, cfg.train.seed);

    std::optional<Checkpoint> resume;
    if (!a.resume.empty()) resume = load_checkpoint(a.resume);
    const std::string resolved = serialize_config(cfg);
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / kConfigEcho, resolved);

    FitOptions opt;
    opt.out_dir = fs::path(a.out);
    // checkpoints carry no paths, so a run directory can move without changing its bytes
    RunConfig stored = cfg;
    stored.data_dir.clear();
    stored.out_dir.clear();
    opt.config_text = serialize_config(stored);
    opt.stop_after_step = a.max_steps;
    const auto res = fit(ds, cfg.train, resume, opt);
    write_losses_csv(fs::path(a.out) / "losses.csv", res.report.steps, resume ? resume->step : 0);
    out << "trained to step " << res.state.step << " on " << ds.pairs.size() << " pairs; outputs in " << a.out << "\n";
    return kOk;
}

struct InferArgs {
    std::string checkpoint, images, out;
};

inline int infer_cmd(const InferArgs& a, std::ostream& out) {
    const auto ckpt = load_checkpoint(a.checkpoint);
    auto generator = load_generator(ckpt);
    const std::size_t size = checkpoint_arch(ckpt).image_size;
    const auto palette = default_palette();
    const auto files = png_files(a.images);
    fs::create_directories(a.out);
    for (const auto& f : files) {
        auto img = png::read_gray(f);
        if (img.width != size || img.height != size) img = resize_bilinear(img, size, size);
        png::write(fs::path(a.out) / f.filename(), decode_mask(predict_mask(generator, img, palette), palette));
    }
    write_text(fs::path(a.out) / kConfigEcho, ckpt.config);
    out << "wrote " << files.size() << " masks to " << a.out << "\n";
    return kOk;
}

struct EvaluateArgs {
    std::string pred, gt, format = "text", out;
    bool accuracy = false;
};

inline int evaluate_cmd(const EvaluateArgs& a, std::ostream& out) {
    const auto palette = default_palette();
    std::vector<metrics::EvalPair> pairs;
    for (const auto& g : png_files(a.gt)) {
        const auto p = fs::path(a.pred) / g.filename();
        if (!fs::exists(p)) throw MissingMask("no prediction for " + g.filename().string());
        pairs.push_back({g.stem().string(), encode_mask(png::read_rgb(p), palette, 0),
                         encode_mask(png::read_rgb(g), palette, 0)});
    }
    const auto report = metrics::evaluate_dataset(pairs, palette);
    const auto text = metrics::render_report(
        report, {a.format == "csv" ? metrics::Format::csv : metrics::Format::text, a.accuracy});
    if (a.out.empty()) {
        out << text;
    } else {
        write_text(a.out, text);
        out << "evaluated " << pairs.size() << " images; report in " << a.out << "\n";
    }
    return kOk;
}

struct InspectArgs {
    std::string preset = "paper", config;
    bool no_skip = false;
};

inline int inspect_arch(const InspectArgs& a, std::ostream& out) {
    ArchConfig arch;
    if (!a.config.empty()) {
        arch = load_config(a.config).train.arch;
    } else if (a.preset == "tiny") {
        arch = ArchConfig::tiny();
    } else {
        arch = ArchConfig::paper();
    }
    if (a.no_skip) arch.skip_connections = false;
    const auto print = [&](const char* title, const std::vector<LayerSpec>& layers, Shape input) {
        out << title << " (" << layers.size() << " layers, " << parameter_count(layers) << " parameters)\n"
            << render_table(layer_table(layers, input)) << "input " << to_string(input) << " -> output "
            << to_string(infer_shapes(layers, input).back()) << "\n";
    };
    print("Generator", generator_layers(arch), generator_input(arch));
    out << "\n";
    print("Discriminator", discriminator_layers(arch), discriminator_input(arch));
    return kOk;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Conditional-GAN segmentation of dental bitewing radiographs", "dentgan"};
    app.require_subcommand(1);

    GenPhantomsArgs gp;
    auto* c_gen = app.add_subcommand("gen-phantoms", "Write procedural (radiograph, mask) pairs");
    c_gen->add_option("--n", gp.n, "Number of pairs")->required()->check(CLI::PositiveNumber);
    c_gen->add_option("--seed", gp.seed, "Seed");
    c_gen->add_option("--out", gp.out, "Output directory")->required();
    c_gen->add_option("--config", gp.config, "Config file (phantom_* keys)");
    c_gen->add_option("--size", gp.size, "Image size override");

    AugmentArgs ag;
    auto* c_aug = app.add_subcommand("augment", "Expand a pair directory with random transforms");
    c_aug->add_option("--data", ag.data, "Input directory with images/ and masks/")->required();
    c_aug->add_option("--out", ag.out, "Output directory")->required();
    c_aug->add_option("--factor", ag.factor, "Expansion factor");
    c_aug->add_option("--seed", ag.seed, "Seed");
    c_aug->add_option("--config", ag.config, "Config file (augmentation keys)");

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "Adversarial training");
    c_train->add_option("--config", tr.config, "Config file");
    c_train->add_option("--data", tr.data, "Directory with images/ and masks/")->required();
    c_train->add_option("--out", tr.out, "Output directory")->required();
    c_train->add_option("--resume", tr.resume, "Checkpoint to resume from");
    c_train->add_option("--seed", tr.seed, "Seed override");
    c_train->add_option("--max-steps", tr.max_steps, "Stop after this global step");

    InferArgs in;
    auto* c_infer = app.add_subcommand("infer", "Segment radiographs with a trained generator");
    c_infer->add_option("--checkpoint", in.checkpoint, "Checkpoint file")->required();
    c_infer->add_option("--images", in.images, "Directory of grayscale PNGs")->required();
    c_infer->add_option("--out", in.out, "Output directory for palette masks")->required();

    EvaluateArgs ev;
    auto* c_eval = app.add_subcommand("evaluate", "Per-class precision / TPR / TNR / Dice");
    c_eval->add_option("--pred", ev.pred, "Predicted mask directory")->required();
    c_eval->add_option("--gt", ev.gt, "Ground-truth mask directory")->required();
    c_eval->add_option("--format", ev.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
    c_eval->add_option("--out", ev.out, "Report file (default stdout)");
    c_eval->add_flag("--accuracy", ev.accuracy, "Add an accuracy column");

    InspectArgs ia;
    auto* c_arch = app.add_subcommand("inspect-arch", "Print the generator and discriminator layer tables");
    c_arch->add_option("--preset", ia.preset, "paper or tiny")->check(CLI::IsMember({"paper", "tiny"}));
    c_arch->add_option("--config", ia.config, "Config file (overrides preset)");
    c_arch->add_flag("--no-skip", ia.no_skip, "Encoder-decoder without skip connections");

    std::vector<const char*> argv{"dentgan"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (*c_gen) return gen_phantoms(gp, out);
        if (*c_aug) return augment_cmd(ag, out);
        if (*c_train) return train_cmd(tr, out);
        if (*c_infer) return infer_cmd(in, out);
        if (*c_eval) return evaluate_cmd(ev, out);
        if (*c_arch) return inspect_arch(ia, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntime;
    }
    err << app.help();
    return kUsage;
}

inline int run(int argc, char** argv) {
    return run(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace dentgan::cli
