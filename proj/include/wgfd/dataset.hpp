#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wgfd {

enum class Label : int { Real = 0, Fake = 1 };

enum class Split { Unassigned, Train, Val, Test };

std::string_view to_string(Split s);
Split parse_split(std::string_view text);

struct DatasetItem {
    std::string source; // image path, or "synth" for generated items
    Label label = Label::Real;
    std::string class_tag;
    std::optional<std::uint64_t> seed; // set for generated items

    friend bool operator==(const DatasetItem&, const DatasetItem&) = default;
};

struct SkipRecord {
    std::string path;
    std::string reason;
};

struct IngestResult {
    std::vector<DatasetItem> items;
    std::vector<SkipRecord> skipped;
};

// One item per decodable PNG/JPEG directly inside `dir`, in lexicographic
// filename order. Undecodable files are reported in `skipped`.
IngestResult ingest_directory(const std::filesystem::path& dir, Label label, const std::string& class_tag);

struct SplitSpec {
    double train_frac = 0.70;
    double val_frac = 0.15;
    double test_frac = 0.15;
    std::uint64_t seed = 0;

    // Fractions must be non-negative and sum to 1 within 1e-9.
    void validate() const;
};

struct SplitIndices {
    std::vector<std::size_t> train, val, test;
};

// Stratified by (label, class_tag). Each stratum is shuffled with a seeded
// generator and cut with largest-remainder rounding; ties in the remainder go
// to the earlier subset (train, then val, then test). Indices within each
// subset are ascending.
SplitIndices split_dataset(const std::vector<DatasetItem>& items, const SplitSpec& spec);

// Largest-remainder apportionment of n items over the three fractions.
std::array<std::size_t, 3> apportion(std::size_t n, const SplitSpec& spec);

struct ManifestRecord {
    DatasetItem item;
    Split split = Split::Unassigned;

    friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

// JSON Lines. Field order per record: source, label, class_tag, split, then
// seed when present. Relative sources are resolved against the manifest's
// directory by resolve_source().
std::string format_manifest_line(const ManifestRecord& rec);
ManifestRecord parse_manifest_line(std::string_view line);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);
std::filesystem::path resolve_source(const std::filesystem::path& manifest_path, const DatasetItem& item);

} // namespace wgfd
