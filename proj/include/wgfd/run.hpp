#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wgfd/dataset.hpp"
#include "wgfd/metrics.hpp"
#include "wgfd/model.hpp"
#include "wgfd/pipeline.hpp"
#include "wgfd/synth.hpp"
#include "wgfd/train.hpp"

// End-to-end runs shared by the command-line tool and the acceptance check:
// one config file describes data, split, model, training and output.
namespace wgfd {

struct RunConfig {
    std::uint64_t seed = 0;   // master seed; data, split, init and training seeds derive from it
    std::size_t side = 64;    // classifier input size (and synthetic image size)
    std::string domain = "db2";
    std::filesystem::path out = "out";

    std::filesystem::path manifest; // empty: generate synthetic data in memory
    std::size_t synth_per_class = 500;
    SynthConfig synth;
    SplitSpec split{0.70, 0.15, 0.15, 0};
    nn::ModelConfig model;
    nn::TrainConfig train;
    double threshold = 0.5;

    // Copies side and the master seed into the nested configs and checks
    // everything; call after all overrides are applied.
    void resolve();
    DomainKind domain_kind() const { return DomainKind::parse(domain); }
};

nlohmann::ordered_json config_to_json(const RunConfig& cfg);
// Fields absent from `j` keep their value in `base`; unknown keys are errors.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

struct LoadedData {
    std::filesystem::path manifest_path; // empty for in-memory synthetic data
    std::vector<ManifestRecord> records;
    std::vector<ImageTensor> images; // decoded pixels, parallel to records
};

// Synthetic data from the config, or the manifest's items decoded from disk
// (synthetic items carrying a seed are regenerated). Items without a split
// are assigned with split_dataset().
LoadedData load_data(const RunConfig& cfg, Exec exec = Exec::Parallel);

nn::LabeledImages subset(const LoadedData& data, Split split);

using Logger = std::function<void(const std::string&)>;

struct DomainRun {
    std::string domain;
    nn::TrainResult trained;
    metrics::EvalReport report;
    std::size_t parameter_count = 0;
};

// Train on the train split, checkpoint on val, evaluate on test.
DomainRun run_domain(const RunConfig& cfg, const LoadedData& data, const DomainKind& domain,
                     const Logger& log = {}, Exec exec = Exec::Parallel);

// history.csv, model.wgfd, report.json, roc.csv and roc.svg under `dir`.
void write_domain_outputs(const std::filesystem::path& dir, const DomainRun& run, std::uint64_t training_seed);

struct Comparison {
    std::vector<DomainRun> runs; // spatial, haar, db2
};

// Three runs that differ only in the input domain.
Comparison run_compare(const RunConfig& cfg, const LoadedData& data, const Logger& log = {},
                       Exec exec = Exec::Parallel);

std::string comparison_csv(const Comparison& c);
std::string comparison_text(const Comparison& c);

// compare.csv, compare.txt and one output directory per domain.
void write_comparison(const std::filesystem::path& dir, const Comparison& c, std::uint64_t training_seed);

} // namespace wgfd
