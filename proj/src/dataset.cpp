#include "wgfd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "wgfd/error.hpp"
#include "wgfd/image.hpp"
#include "wgfd/rng.hpp"

namespace wgfd {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    case Split::Unassigned: break;
    }
    return "";
}

Split parse_split(std::string_view text) {
    if (text.empty()) return Split::Unassigned;
    if (text == "train") return Split::Train;
    if (text == "val") return Split::Val;
    if (text == "test") return Split::Test;
    throw InvalidArgument("unknown split '" + std::string(text) + "'");
}

IngestResult ingest_directory(const std::filesystem::path& dir, Label label, const std::string& class_tag) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("missing directory '" + dir.string() + "'");

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

    IngestResult out;
    for (const auto& f : files) {
        try {
            (void)decode_image(read_file(f));
            out.items.push_back({f.string(), label, class_tag, std::nullopt});
        } catch (const Error& e) {
            out.skipped.push_back({f.string(), e.what()});
        }
    }
    return out;
}

void SplitSpec::validate() const {
    if (train_frac < 0 || val_frac < 0 || test_frac < 0) throw InvalidArgument("split fractions must be non-negative");
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
        throw InvalidArgument("split fractions must sum to 1");
    }
}

std::array<std::size_t, 3> apportion(std::size_t n, const SplitSpec& spec) {
    const double fr[3] = {spec.train_frac, spec.val_frac, spec.test_frac};
    std::array<std::size_t, 3> count{};
    double rem[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double quota = static_cast<double>(n) * fr[i];
        // Absorb representation error such as 10 * 0.7 = 7.000000000000001.
        const double base = std::floor(quota + 1e-9);
        count[i] = static_cast<std::size_t>(base);
        rem[i] = std::max(0.0, quota - base);
        assigned += count[i];
    }
    while (assigned < n) {
        int best = 0;
        for (int i = 1; i < 3; ++i) {
            if (rem[i] > rem[best] + 1e-9) best = i;
        }
        ++count[best];
        rem[best] = -1.0;
        ++assigned;
    }
    return count;
}

SplitIndices split_dataset(const std::vector<DatasetItem>& items, const SplitSpec& spec) {
    if (items.empty()) throw EmptyDatasetError("cannot split an empty item list");
    spec.validate();

    std::map<std::pair<int, std::string>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < items.size(); ++i) {
        strata[{static_cast<int>(items[i].label), items[i].class_tag}].push_back(i);
    }

    SplitIndices out;
    std::uint64_t stratum_no = 0;
    for (auto& [key, members] : strata) {
        Rng rng(derive_seed({spec.seed, stratum_no++}));
        rng.shuffle(members);
        const auto counts = apportion(members.size(), spec);
        std::vector<std::size_t>* subsets[3] = {&out.train, &out.val, &out.test};
        auto it = members.begin();
        for (std::size_t s = 0; s < 3; ++s) {
            const auto k = static_cast<long>(counts[s]);
            subsets[s]->insert(subsets[s]->end(), it, it + k);
            it += k;
        }
    }
    for (auto* dst : {&out.train, &out.val, &out.test}) std::sort(dst->begin(), dst->end());
    return out;
}

std::string format_manifest_line(const ManifestRecord& rec) {
    ordered_json j;
    j["source"] = rec.item.source;
    j["label"] = static_cast<int>(rec.item.label);
    j["class_tag"] = rec.item.class_tag;
    j["split"] = std::string(to_string(rec.split));
    if (rec.item.seed) j["seed"] = *rec.item.seed;
    return j.dump();
}

ManifestRecord parse_manifest_line(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed manifest record: ") + e.what());
    }
    try {
        ManifestRecord rec;
        rec.item.source = j.at("source").get<std::string>();
        const int label = j.at("label").get<int>();
        if (label != 0 && label != 1) throw InvalidArgument("manifest label must be 0 or 1");
        rec.item.label = static_cast<Label>(label);
        rec.item.class_tag = j.value("class_tag", std::string());
        rec.split = parse_split(j.value("split", std::string()));
        if (j.contains("seed")) rec.item.seed = j.at("seed").get<std::uint64_t>();
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed manifest record: ") + e.what());
    }
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    for (const auto& r : records) out << format_manifest_line(r) << '\n';
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
    std::vector<ManifestRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_manifest_line(line));
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::filesystem::path resolve_source(const std::filesystem::path& manifest_path, const DatasetItem& item) {
    std::filesystem::path p(item.source);
    if (p.is_absolute()) return p;
    return manifest_path.parent_path() / p;
}

} // namespace wgfd
