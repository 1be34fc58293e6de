#include "wgfd/model_io.hpp"

#include <bit>
#include <cstring>
#include <string>

#include <zlib.h>

#include "json.hpp"

#include "wgfd/error.hpp"
#include "wgfd/image.hpp"

namespace wgfd::nn {

namespace {

constexpr char kMagic[4] = {'W', 'G', 'F', 'D'};
constexpr std::size_t kHeader = 4 + 1 + 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
    uLong crc = crc32(0L, Z_NULL, 0);
    return static_cast<std::uint32_t>(crc32(crc, data, static_cast<uInt>(n)));
}

} // namespace

std::vector<std::uint8_t> serialize_model(const Model<float>& model, std::uint64_t training_seed) {
    const auto& cfg = model.config;
    nlohmann::ordered_json meta;
    meta["config"] = {{"input_side", cfg.input_side},
                      {"channels_per_block", cfg.channels_per_block},
                      {"kernel_size", cfg.kernel_size},
                      {"dense_hidden", cfg.dense_hidden},
                      {"seed", cfg.seed}};
    meta["training_seed"] = training_seed;
    auto table = nlohmann::ordered_json::array();
    for (const auto& t : model.params) table.push_back({{"name", t.name}, {"shape", t.shape}});
    meta["tensors"] = table;
    const std::string text = meta.dump();

    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.push_back(kWeightFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out.insert(out.end(), text.begin(), text.end());
    for (const auto& t : model.params)
        for (float v : t.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
    put_u32(out, crc_of(out.data(), out.size()));
    return out;
}

StoredModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw VersionMismatchError("not a weight file (magic bytes are not \"WGFD\")");
    if (bytes.size() < 5) throw CorruptFileError("weight file truncated");
    if (bytes[4] != kWeightFormatVersion) {
        throw VersionMismatchError("unsupported weight format version " + std::to_string(bytes[4]) + " (expected " +
                                   std::to_string(kWeightFormatVersion) + ")");
    }
    if (bytes.size() < kHeader + 4) throw CorruptFileError("weight file truncated");
    const std::size_t body = bytes.size() - 4;
    if (get_u32(bytes.data() + body) != crc_of(bytes.data(), body))
        throw CorruptFileError("weight file checksum mismatch (truncated or corrupted)");

    const std::size_t meta_len = get_u32(bytes.data() + 5);
    if (kHeader + meta_len > body) throw CorruptFileError("weight file metadata length out of range");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(bytes.begin() + kHeader, bytes.begin() + static_cast<long>(kHeader + meta_len));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("weight file metadata is not valid JSON: ") + e.what());
    }

    StoredModel out;
    std::vector<std::pair<std::string, std::vector<std::size_t>>> stored;
    try {
        const auto& c = meta.at("config");
        ModelConfig cfg;
        cfg.input_side = c.at("input_side").get<std::size_t>();
        cfg.channels_per_block = c.at("channels_per_block").get<std::vector<std::size_t>>();
        cfg.kernel_size = c.at("kernel_size").get<std::size_t>();
        cfg.dense_hidden = c.at("dense_hidden").get<std::size_t>();
        cfg.seed = c.at("seed").get<std::uint64_t>();
        out.model.config = cfg;
        out.training_seed = meta.at("training_seed").get<std::uint64_t>();
        for (const auto& t : meta.at("tensors"))
            stored.emplace_back(t.at("name").get<std::string>(), t.at("shape").get<std::vector<std::size_t>>());
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("weight file metadata is incomplete: ") + e.what());
    }

    std::vector<std::pair<std::string, std::vector<std::size_t>>> expected;
    try {
        expected = parameter_layout(out.model.config);
    } catch (const InvalidArgument& e) {
        throw ShapeMismatchError(std::string("stored architecture is invalid: ") + e.what());
    }
    if (stored != expected)
        throw ShapeMismatchError("stored tensor table does not match the stored architecture");

    std::size_t offset = kHeader + meta_len;
    std::size_t total = 0;
    for (const auto& [name, shape] : expected) {
        std::size_t n = 1;
        for (auto d : shape) n *= d;
        total += n;
    }
    if (offset + 4 * total != body) {
        throw ShapeMismatchError("tensor data holds " + std::to_string((body - offset) / 4) + " values; table needs " +
                                 std::to_string(total));
    }
    for (const auto& [name, shape] : expected) {
        std::size_t n = 1;
        for (auto d : shape) n *= d;
        Tensor<float> t{name, shape, std::vector<float>(n)};
        for (auto& v : t.data) {
            v = std::bit_cast<float>(get_u32(bytes.data() + offset));
            offset += 4;
        }
        out.model.params.push_back(std::move(t));
    }
    return out;
}

void save_model(const std::filesystem::path& path, const Model<float>& model, std::uint64_t training_seed) {
    write_file(path, serialize_model(model, training_seed));
}

StoredModel load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

} // namespace wgfd::nn
