#include "wgfd/run.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "wgfd/error.hpp"
#include "wgfd/model_io.hpp"

namespace wgfd {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads known keys of one JSON object and rejects the rest.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw InvalidArgument("config: '" + where_ + "' must be an object");
    }

    template <typename T>
    void get(const char* key, T& dst) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            dst = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw InvalidArgument("config: bad value for '" + where_ + key + "': " + e.what());
        }
    }

    void path(const char* key, std::filesystem::path& dst) {
        std::string s = dst.string();
        get(key, s);
        dst = s;
    }

    const json* section(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw InvalidArgument("config: unknown key '" + where_ + k + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void log_line(const Logger& log, const std::string& s) {
    if (log) log(s);
}

} // namespace

void RunConfig::resolve() {
    if (side < 2 || side % 2 != 0) throw InvalidArgument("side must be even and >= 2");
    (void)domain_kind();
    synth.side = side;
    model.input_side = side;
    model.seed = seed;
    train.seed = seed;
    split.seed = seed;
    synth.validate();
    split.validate();
    model.validate();
    train.validate();
    if (manifest.empty() && synth_per_class == 0) throw InvalidArgument("synth_per_class must be >= 1");
    if (!manifest.empty() && !std::filesystem::exists(manifest))
        throw IoError("manifest not found: " + manifest.string());
}

ordered_json config_to_json(const RunConfig& c) {
    ordered_json j;
    j["seed"] = c.seed;
    j["side"] = c.side;
    j["domain"] = c.domain;
    j["out"] = c.out.string();
    j["data"] = {{"manifest", c.manifest.string()}, {"synth_per_class", c.synth_per_class}};
    j["synth"] = {{"blur_sigma", c.synth.blur_sigma},
                  {"noise_sigma", c.synth.noise_sigma},
                  {"upsample_kernel", c.synth.upsample_kernel},
                  {"artifact_gain", c.synth.artifact_gain}};
    j["split"] = {{"train", c.split.train_frac}, {"val", c.split.val_frac}, {"test", c.split.test_frac}};
    j["model"] = {{"channels_per_block", c.model.channels_per_block},
                  {"kernel_size", c.model.kernel_size},
                  {"dense_hidden", c.model.dense_hidden}};
    const auto& t = c.train;
    j["train"] = {{"learning_rate", t.learning_rate},
                  {"batch_size", t.batch_size},
                  {"max_epochs", t.max_epochs},
                  {"adam_beta1", t.adam_beta1},
                  {"adam_beta2", t.adam_beta2},
                  {"adam_eps", t.adam_eps},
                  {"early_stop_patience", t.early_stop_patience},
                  {"plateau_patience", t.plateau_patience},
                  {"plateau_factor", t.plateau_factor},
                  {"min_lr", t.min_lr},
                  {"min_delta", t.min_delta},
                  {"augment", t.augment},
                  {"augmentation",
                   {{"max_rotation_deg", t.augmentation.max_rotation_deg},
                    {"max_shift_frac", t.augmentation.max_shift_frac},
                    {"max_zoom_frac", t.augmentation.max_zoom_frac},
                    {"hflip_prob", t.augmentation.hflip_prob}}}};
    j["eval"] = {{"threshold", c.threshold}};
    return j;
}

RunConfig config_from_json(const json& j, RunConfig c) {
    Fields top(j, "");
    top.get("seed", c.seed);
    top.get("side", c.side);
    top.get("domain", c.domain);
    top.path("out", c.out);
    if (const auto* d = top.section("data")) {
        Fields f(*d, "data.");
        f.path("manifest", c.manifest);
        f.get("synth_per_class", c.synth_per_class);
        f.finish();
    }
    if (const auto* s = top.section("synth")) {
        Fields f(*s, "synth.");
        f.get("blur_sigma", c.synth.blur_sigma);
        f.get("noise_sigma", c.synth.noise_sigma);
        f.get("upsample_kernel", c.synth.upsample_kernel);
        f.get("artifact_gain", c.synth.artifact_gain);
        f.finish();
    }
    if (const auto* s = top.section("split")) {
        Fields f(*s, "split.");
        f.get("train", c.split.train_frac);
        f.get("val", c.split.val_frac);
        f.get("test", c.split.test_frac);
        f.finish();
    }
    if (const auto* m = top.section("model")) {
        Fields f(*m, "model.");
        f.get("channels_per_block", c.model.channels_per_block);
        f.get("kernel_size", c.model.kernel_size);
        f.get("dense_hidden", c.model.dense_hidden);
        f.finish();
    }
    if (const auto* t = top.section("train")) {
        Fields f(*t, "train.");
        auto& tc = c.train;
        f.get("learning_rate", tc.learning_rate);
        f.get("batch_size", tc.batch_size);
        f.get("max_epochs", tc.max_epochs);
        f.get("adam_beta1", tc.adam_beta1);
        f.get("adam_beta2", tc.adam_beta2);
        f.get("adam_eps", tc.adam_eps);
        f.get("early_stop_patience", tc.early_stop_patience);
        f.get("plateau_patience", tc.plateau_patience);
        f.get("plateau_factor", tc.plateau_factor);
        f.get("min_lr", tc.min_lr);
        f.get("min_delta", tc.min_delta);
        f.get("augment", tc.augment);
        if (const auto* a = f.section("augmentation")) {
            Fields g(*a, "train.augmentation.");
            g.get("max_rotation_deg", tc.augmentation.max_rotation_deg);
            g.get("max_shift_frac", tc.augmentation.max_shift_frac);
            g.get("max_zoom_frac", tc.augmentation.max_zoom_frac);
            g.get("hflip_prob", tc.augmentation.hflip_prob);
            g.finish();
        }
        f.finish();
    }
    if (const auto* e = top.section("eval")) {
        Fields f(*e, "eval.");
        f.get("threshold", c.threshold);
        f.finish();
    }
    top.finish();
    return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    const auto bytes = read_file(path);
    json j;
    try {
        j = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw InvalidArgument("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, std::move(base));
}

LoadedData load_data(const RunConfig& cfg, Exec exec) {
    LoadedData data;
    if (cfg.manifest.empty()) {
        auto ds = build_synth_dataset(cfg.synth_per_class, cfg.synth, cfg.seed, exec);
        for (auto& it : ds.items) data.records.push_back({std::move(it), Split::Unassigned});
        data.images = std::move(ds.images);
    } else {
        data.manifest_path = cfg.manifest;
        data.records = read_manifest(cfg.manifest);
        if (data.records.empty()) throw EmptyDatasetError("manifest " + cfg.manifest.string() + " has no items");
        data.images.resize(data.records.size());
        std::vector<std::exception_ptr> errors(data.records.size());
        const long n = static_cast<long>(data.records.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
        for (long i = 0; i < n; ++i) {
            try {
                const auto& item = data.records[i].item;
                if (item.source == "synth") data.images[i] = synth_item(item, cfg.synth);
                else data.images[i] = read_image(resolve_source(cfg.manifest, item));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    const bool all_assigned = std::all_of(data.records.begin(), data.records.end(),
                                          [](const ManifestRecord& r) { return r.split != Split::Unassigned; });
    if (!all_assigned) {
        std::vector<DatasetItem> items;
        for (const auto& r : data.records) items.push_back(r.item);
        const auto idx = split_dataset(items, cfg.split);
        for (auto i : idx.train) data.records[i].split = Split::Train;
        for (auto i : idx.val) data.records[i].split = Split::Val;
        for (auto i : idx.test) data.records[i].split = Split::Test;
    }
    return data;
}

nn::LabeledImages subset(const LoadedData& data, Split split) {
    nn::LabeledImages out;
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        if (data.records[i].split != split) continue;
        out.images.push_back(data.images[i]);
        out.labels.push_back(data.records[i].item.label);
    }
    return out;
}

DomainRun run_domain(const RunConfig& cfg, const LoadedData& data, const DomainKind& domain, const Logger& log,
                     Exec exec) {
    const auto train_set = subset(data, Split::Train);
    const auto val_set = subset(data, Split::Val);
    const auto test_set = subset(data, Split::Test);
    if (train_set.images.empty()) throw EmptyDatasetError("training split is empty");
    if (val_set.images.empty()) throw EmptyDatasetError("validation split is empty");
    if (test_set.images.empty()) throw EmptyDatasetError("test split is empty");

    DomainRun run;
    run.domain = domain.label();
    const auto initial = nn::build_model<float>(cfg.model);
    run.parameter_count = initial.parameter_count();
    log_line(log, "[" + run.domain + "] training on " + std::to_string(train_set.images.size()) + " images, " +
                      std::to_string(run.parameter_count) + " parameters");
    run.trained = nn::train(initial, train_set, val_set, cfg.train, domain, exec, [&](const nn::EpochRecord& e) {
        log_line(log, "[" + run.domain + "] epoch " + std::to_string(e.epoch) + " train_loss " +
                          fmt("%.4f", e.train_loss) + " val_loss " + fmt("%.4f", e.val_loss) + " val_acc " +
                          fmt("%.3f", e.val_acc) + " lr " + fmt("%.3g", e.lr) + (e.checkpointed ? " *" : ""));
    });
    const auto probs = nn::predict(run.trained.model, test_set.images, domain, exec);
    run.report = metrics::evaluate(test_set.labels, probs, cfg.threshold);
    log_line(log, "[" + run.domain + "] test auc " + fmt("%.4f", run.report.auc) + " accuracy " +
                      fmt("%.4f", run.report.accuracy));
    return run;
}

void write_domain_outputs(const std::filesystem::path& dir, const DomainRun& run, std::uint64_t training_seed) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    nn::write_history_csv(dir / "history.csv", run.trained.history);
    nn::save_model(dir / "model.wgfd", run.trained.model, training_seed);
    metrics::write_text(dir / "report.json", metrics::report_json(run.report));
    metrics::write_text(dir / "roc.csv", metrics::roc_csv(run.report.roc));
    metrics::write_text(dir / "roc.svg", metrics::roc_svg(run.report.roc, "ROC - " + run.domain));
}

Comparison run_compare(const RunConfig& cfg, const LoadedData& data, const Logger& log, Exec exec) {
    Comparison c;
    for (const char* d : {"spatial", "haar", "db2"}) c.runs.push_back(run_domain(cfg, data, DomainKind::parse(d), log, exec));
    return c;
}

std::string comparison_csv(const Comparison& c) {
    std::string out = "domain,accuracy,f1,auc,ap\n";
    for (const auto& r : c.runs) {
        out += r.domain + "," + fmt("%.6f", r.report.accuracy) + "," + fmt("%.6f", r.report.f1) + "," +
               fmt("%.6f", r.report.auc) + "," + fmt("%.6f", r.report.average_precision) + "\n";
    }
    return out;
}

std::string comparison_text(const Comparison& c) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %10s\n", "domain", "accuracy", "f1", "auc", "ap");
    os << line;
    for (const auto& r : c.runs) {
        std::snprintf(line, sizeof line, "%-10s %10.4f %10.4f %10.4f %10.4f\n", r.domain.c_str(), r.report.accuracy,
                      r.report.f1, r.report.auc, r.report.average_precision);
        os << line;
    }
    return os.str();
}

void write_comparison(const std::filesystem::path& dir, const Comparison& c, std::uint64_t training_seed) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    metrics::write_text(dir / "compare.csv", comparison_csv(c));
    metrics::write_text(dir / "compare.txt", comparison_text(c));
    for (const auto& r : c.runs) write_domain_outputs(dir / r.domain, r, training_seed);
}

} // namespace wgfd
