// wgfd: wavelet-domain fake-image detection experiments from the command line.
//
//   wgfd decompose photo.png --wavelet db2 -o mosaic.png
//   wgfd synth --n 500 --out data
//   wgfd split data/manifest.jsonl
//   wgfd train --manifest data/manifest.jsonl --domain haar --out run
//   wgfd eval --weights run/model.wgfd --manifest data/manifest.jsonl --domain haar --out run
//   wgfd compare --config exp.json --out cmp

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "wgfd/error.hpp"
#include "wgfd/model_io.hpp"
#include "wgfd/run.hpp"

using namespace wgfd;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool quiet = false;
    bool print_config = false;
};

Logger make_logger(bool quiet) {
    if (quiet) return {};
    return [](const std::string& s) { std::cerr << s << '\n'; };
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

// Decompose --------------------------------------------------------------

struct DecomposeArgs {
    std::string input;
    std::string output;
    std::string wavelet = "haar";
    std::size_t levels = 1;
    std::string mode = "periodization";
};

ImageTensor even_sized(const ImageTensor& img) {
    if (img.height < 2 || img.width < 2) throw InvalidArgument("image too small to decompose (need at least 2x2)");
    if (img.height % 2 == 0 && img.width % 2 == 0) return img;
    return resize_bilinear(img, img.height & ~std::size_t{1}, img.width & ~std::size_t{1});
}

int cmd_decompose(const DecomposeArgs& a, const RunConfig& cfg, const Logger& log) {
    const auto& fb = wavelet::filter_bank(a.wavelet);
    const auto mode = wavelet::parse_boundary_mode(a.mode);
    if (a.levels == 0) throw InvalidArgument("levels must be >= 1");
    ImageTensor img = even_sized(read_image(a.input));

    fs::path out = a.output.empty() ? cfg.out / (fs::path(a.input).stem().string() + "_" + fb.name + ".png")
                                    : fs::path(a.output);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    for (std::size_t level = 1; level <= a.levels; ++level) {
        const auto mosaic = subband_mosaic(img, fb, mode);
        fs::path target = out;
        if (a.levels > 1) {
            target = out.parent_path() /
                     (out.stem().string() + "_L" + std::to_string(level) + out.extension().string());
        }
        write_png(target, mosaic);
        if (log) log("wrote " + target.string() + " (" + std::to_string(mosaic.width) + "x" +
                     std::to_string(mosaic.height) + ")");
        if (level == a.levels) break;
        // Next level works on the approximation quadrant, which the mosaic
        // stores at the same brightness scale as the input.
        const std::size_t h = mosaic.height / 2, w = mosaic.width / 2;
        if (h < 2 || w < 2 || h % 2 || w % 2)
            throw InvalidArgument("too many levels: " + std::to_string(level) + " is the most this image supports");
        ImageTensor ll(h, w, mosaic.channels);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                for (std::size_t c = 0; c < mosaic.channels; ++c) ll.at(y, x, c) = mosaic.at(y, x, c);
        img = std::move(ll);
    }
    return 0;
}

// Synth ------------------------------------------------------------------

int cmd_synth(std::optional<std::size_t> n, const RunConfig& cfg, const Logger& log) {
    const std::size_t per_class = n.value_or(cfg.synth_per_class);
    if (per_class == 0) throw InvalidArgument("--n must be >= 1");
    const auto ds = build_synth_dataset(per_class, cfg.synth, cfg.seed);
    ensure_dir(cfg.out / "images");
    std::vector<ManifestRecord> records;
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
        const auto& item = ds.items[i];
        char name[64];
        std::snprintf(name, sizeof name, "images/%s_%05zu.png", item.label == Label::Fake ? "fake" : "real",
                      i % per_class);
        write_png(cfg.out / name, ds.images[i]);
        DatasetItem stored = item;
        stored.source = name;
        records.push_back({stored, Split::Unassigned});
    }
    write_manifest(cfg.out / "manifest.jsonl", records);
    if (log) log("wrote " + std::to_string(records.size()) + " images and " + (cfg.out / "manifest.jsonl").string());
    return 0;
}

// Split ------------------------------------------------------------------

int cmd_split(const std::string& manifest, const std::string& output, const RunConfig& cfg, const Logger& log) {
    auto records = read_manifest(manifest);
    if (records.empty()) throw EmptyDatasetError("manifest " + manifest + " has no items");
    std::vector<DatasetItem> items;
    for (const auto& r : records) items.push_back(r.item);
    const auto idx = split_dataset(items, cfg.split);
    for (auto i : idx.train) records[i].split = Split::Train;
    for (auto i : idx.val) records[i].split = Split::Val;
    for (auto i : idx.test) records[i].split = Split::Test;
    const fs::path target = output.empty() ? fs::path(manifest) : fs::path(output);
    write_manifest(target, records);
    if (log) {
        log("split " + std::to_string(records.size()) + " items: train " + std::to_string(idx.train.size()) +
            ", val " + std::to_string(idx.val.size()) + ", test " + std::to_string(idx.test.size()) + " -> " +
            target.string());
    }
    return 0;
}

// Train / eval / compare -------------------------------------------------

int cmd_train(const RunConfig& cfg, const Logger& log) {
    const auto data = load_data(cfg);
    const auto train_set = subset(data, Split::Train);
    const auto val_set = subset(data, Split::Val);
    if (train_set.images.empty()) throw EmptyDatasetError("training split is empty");
    if (val_set.images.empty()) throw EmptyDatasetError("validation split is empty");
    const auto domain = cfg.domain_kind();
    const auto result = nn::train(nn::build_model<float>(cfg.model), train_set, val_set, cfg.train, domain,
                                  Exec::Parallel, [&](const nn::EpochRecord& e) {
                                      if (!log) return;
                                      char line[160];
                                      std::snprintf(line, sizeof line,
                                                    "epoch %zu train_loss %.4f val_loss %.4f val_acc %.3f lr %.3g%s",
                                                    e.epoch, e.train_loss, e.val_loss, e.val_acc, e.lr,
                                                    e.checkpointed ? " *" : "");
                                      log(line);
                                  });
    ensure_dir(cfg.out);
    nn::write_history_csv(cfg.out / "history.csv", result.history);
    nn::save_model(cfg.out / "model.wgfd", result.model, cfg.train.seed);
    if (log) log("wrote " + (cfg.out / "model.wgfd").string() + " and " + (cfg.out / "history.csv").string());
    return 0;
}

int cmd_eval(const std::string& weights, const std::string& split_name, bool svg, const RunConfig& cfg,
             const Logger& log) {
    const auto stored = nn::load_model(weights);
    const auto data = load_data(cfg);
    const auto split = parse_split(split_name);
    const auto set = subset(data, split);
    if (set.images.empty()) throw EmptyDatasetError(split_name + " split is empty");
    if (stored.model.config.input_side != cfg.side) {
        throw ShapeMismatchError("model expects " + std::to_string(stored.model.config.input_side) +
                                 " px inputs but the config side is " + std::to_string(cfg.side));
    }
    const auto probs = nn::predict(stored.model, set.images, cfg.domain_kind());
    const auto report = metrics::evaluate(set.labels, probs, cfg.threshold);
    ensure_dir(cfg.out);
    metrics::write_text(cfg.out / "report.json", metrics::report_json(report));
    metrics::write_text(cfg.out / "roc.csv", metrics::roc_csv(report.roc));
    if (svg) metrics::write_text(cfg.out / "roc.svg", metrics::roc_svg(report.roc, "ROC - " + cfg.domain));
    std::cout << metrics::report_json(report);
    if (log) log("wrote " + (cfg.out / "report.json").string());
    return 0;
}

int cmd_compare(const RunConfig& cfg, const Logger& log) {
    const auto data = load_data(cfg);
    const auto cmp = run_compare(cfg, data, log);
    write_comparison(cfg.out, cmp, cfg.train.seed);
    std::cout << comparison_text(cmp);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial vs wavelet-domain fake image detection"};
    app.fallthrough();
    app.require_subcommand(0, 1);
    Globals g;
    app.add_option("--config", g.config, "JSON run config (see --print-config)");
    app.add_option("--seed", g.seed, "Master seed (overrides the config)");
    app.add_option("--out", g.out, "Output directory (overrides the config)");
    app.add_flag("-q,--quiet", g.quiet, "Only print results and errors");
    app.add_flag("--print-config", g.print_config, "Print the effective config as JSON and exit");

    std::string domain, manifest;
    auto add_data_opts = [&](CLI::App* sub) {
        sub->add_option("--domain", domain, "spatial, haar or db2");
        sub->add_option("--manifest", manifest, "Dataset manifest (default: synthetic data from the config)");
    };

    DecomposeArgs dec;
    auto* decompose = app.add_subcommand("decompose", "Write the one-level sub-band mosaic of an image as PNG");
    decompose->add_option("input", dec.input, "PNG or JPEG file")->required();
    decompose->add_option("-o,--output", dec.output, "Output PNG (default: <out>/<stem>_<wavelet>.png)");
    decompose->add_option("--wavelet", dec.wavelet, "haar or db2");
    decompose->add_option("--levels", dec.levels, "Number of levels; >1 writes one mosaic per level");
    decompose->add_option("--mode", dec.mode, "periodization or symmetric");

    std::optional<std::size_t> synth_n;
    auto* synth = app.add_subcommand("synth", "Generate synthetic real/fake PNGs and a manifest");
    synth->add_option("--n", synth_n, "Images per class");

    std::string split_manifest, split_output;
    std::optional<double> f_train, f_val, f_test;
    auto* split = app.add_subcommand("split", "Assign train/val/test splits in a manifest");
    split->add_option("manifest", split_manifest, "Manifest to split")->required();
    split->add_option("-o,--output", split_output, "Write here instead of in place");
    split->add_option("--train", f_train, "Training fraction");
    split->add_option("--val", f_val, "Validation fraction");
    split->add_option("--test", f_test, "Test fraction");

    auto* train = app.add_subcommand("train", "Train one classifier; writes model.wgfd and history.csv");
    add_data_opts(train);
    std::optional<std::size_t> epochs;
    train->add_option("--epochs", epochs, "Maximum epochs");

    std::string weights, eval_split = "test";
    bool svg = true;
    auto* eval = app.add_subcommand("eval", "Evaluate a weight file; writes report.json, roc.csv, roc.svg");
    add_data_opts(eval);
    eval->add_option("--weights", weights, "Weight file")->required();
    eval->add_option("--split", eval_split, "train, val or test");
    eval->add_flag("!--no-svg", svg, "Skip the SVG plot");

    auto* compare = app.add_subcommand("compare", "Train and evaluate spatial, haar and db2 on one split");
    add_data_opts(compare);
    compare->add_option("--epochs", epochs, "Maximum epochs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg;
        if (!g.config.empty()) cfg = load_config(g.config);
        if (g.seed) cfg.seed = *g.seed;
        if (!g.out.empty()) cfg.out = g.out;
        if (!domain.empty()) cfg.domain = domain;
        if (!manifest.empty()) cfg.manifest = manifest;
        if (epochs) cfg.train.max_epochs = *epochs;
        if (f_train) cfg.split.train_frac = *f_train;
        if (f_val) cfg.split.val_frac = *f_val;
        if (f_test) cfg.split.test_frac = *f_test;
        if (g.print_config) {
            std::cout << config_to_json(cfg).dump(2) << '\n';
            return 0;
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return 2;
        }
        cfg.resolve();
        const auto log = make_logger(g.quiet);
        if (*decompose) return cmd_decompose(dec, cfg, log);
        if (*synth) return cmd_synth(synth_n, cfg, log);
        if (*split) return cmd_split(split_manifest, split_output, cfg, log);
        if (*train) return cmd_train(cfg, log);
        if (*eval) return cmd_eval(weights, eval_split, svg, cfg, log);
        if (*compare) return cmd_compare(cfg, log);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.user_error() ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
