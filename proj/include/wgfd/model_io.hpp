#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wgfd/model.hpp"

namespace wgfd::nn {

// Weight file layout:
//   "WGFD" | version byte 0x01 | u32 LE metadata length | metadata JSON
//   (config, tensor name/shape table, training seed) | float32 LE tensor data
//   in table order | u32 LE CRC-32 of all preceding bytes.
inline constexpr std::uint8_t kWeightFormatVersion = 1;

struct StoredModel {
    Model<float> model;
    std::uint64_t training_seed = 0;
};

std::vector<std::uint8_t> serialize_model(const Model<float>& model, std::uint64_t training_seed);

// Throws VersionMismatchError (magic or version byte), CorruptFileError
// (truncation, checksum, malformed metadata) or ShapeMismatchError.
StoredModel deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const std::filesystem::path& path, const Model<float>& model, std::uint64_t training_seed);
StoredModel load_model(const std::filesystem::path& path);

} // namespace wgfd::nn
