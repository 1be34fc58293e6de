#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wgfd/plane.hpp"

namespace wgfd {

// H x W x C intensities in [0,1], row-major, channel-last.
struct ImageTensor {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> data;

    ImageTensor() = default;
    ImageTensor(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
        : height(h), width(w), channels(c), data(h * w * c, fill) {}

    std::size_t index(std::size_t y, std::size_t x, std::size_t c) const { return (y * width + x) * channels + c; }
    double& at(std::size_t y, std::size_t x, std::size_t c) { return data[index(y, x, c)]; }
    double at(std::size_t y, std::size_t x, std::size_t c) const { return data[index(y, x, c)]; }

    bool same_shape(const ImageTensor& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    friend bool operator==(const ImageTensor&, const ImageTensor&) = default;
};

// Throws InvalidArgument unless channels is 1 or 3, sizes agree and every value is in [0,1].
void validate(const ImageTensor& img);

Plane extract_channel(const ImageTensor& img, std::size_t channel);
void insert_channel(ImageTensor& img, std::size_t channel, const Plane& plane);

ImageTensor to_rgb(const ImageTensor& img);

// Half-pixel-centred bilinear interpolation with edge clamping.
ImageTensor resize_bilinear(const ImageTensor& img, std::size_t out_h, std::size_t out_w);

// PNG and JPEG, detected from the signature. Grayscale is expanded to 3 channels.
ImageTensor decode_image(std::span<const std::uint8_t> bytes);
ImageTensor read_image(const std::filesystem::path& path);

// 8-bit PNG; values are rounded from v*255 after clamping to [0,1].
std::vector<std::uint8_t> encode_png(const ImageTensor& img);
void write_png(const std::filesystem::path& path, const ImageTensor& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace wgfd
