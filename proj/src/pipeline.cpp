#include "wgfd/pipeline.hpp"

#include <algorithm>
#include <cctype>

#include "wgfd/error.hpp"

namespace wgfd {

DomainKind DomainKind::wavelet(std::string_view name) {
    DomainKind d;
    d.wavelet_ = wavelet::filter_bank(name).name;
    return d;
}

DomainKind DomainKind::parse(std::string_view text) {
    std::string key(text);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    if (key == "spatial") return spatial();
    return wavelet(key);
}

namespace {

Plane crop_band(const Plane& band, std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols) {
    Plane out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto src = band.row(row0 + r);
        std::copy_n(src.begin() + static_cast<long>(col0), cols, out.row(r).begin());
    }
    return out;
}

} // namespace

ImageTensor subband_mosaic(const ImageTensor& img, const wavelet::FilterBank& fb, wavelet::BoundaryMode mode,
                           Exec exec) {
    if (img.channels != 1 && img.channels != 3) {
        throw InvalidArgument("sub-band mosaic needs 1 or 3 channels, got " + std::to_string(img.channels));
    }
    if (img.height % 2 != 0 || img.width % 2 != 0 || img.height == 0 || img.width == 0) {
        throw InvalidArgument("sub-band mosaic needs even dimensions, got " + std::to_string(img.height) + "x" +
                              std::to_string(img.width) + " (resize first)");
    }
    const std::size_t hh = img.height / 2;
    const std::size_t hw = img.width / 2;
    const std::size_t offset = mode == wavelet::BoundaryMode::Symmetric ? (fb.length() - 2) / 2 : 0;

    ImageTensor out(img.height, img.width, img.channels);
    for (std::size_t c = 0; c < img.channels; ++c) {
        const auto quad = wavelet::dwt2d(extract_channel(img, c), fb, mode, exec);
        const Plane* bands[4] = {&quad.ll, &quad.lh, &quad.hl, &quad.hh};
        for (std::size_t b = 0; b < 4; ++b) {
            const Plane band = crop_band(*bands[b], offset, offset, hh, hw);
            const std::size_t y0 = (b / 2) * hh;
            const std::size_t x0 = (b % 2) * hw;
            for (std::size_t y = 0; y < hh; ++y) {
                for (std::size_t x = 0; x < hw; ++x) {
                    const double v = b == 0 ? band(y, x) / 2.0 : band(y, x) / 2.0 + 0.5;
                    out.at(y0 + y, x0 + x, c) = std::clamp(v, 0.0, 1.0);
                }
            }
        }
    }
    return out;
}

ImageTensor prepare(const ImageTensor& img, const DomainKind& domain, std::size_t side, Exec exec) {
    if (side == 0 || side % 2 != 0) throw InvalidArgument("side must be even and positive, got " + std::to_string(side));
    ImageTensor rgb = to_rgb(img);
    if (rgb.height != side || rgb.width != side) rgb = resize_bilinear(rgb, side, side);
    if (domain.is_spatial()) return rgb;
    return subband_mosaic(rgb, wavelet::filter_bank(domain.wavelet_name()), wavelet::BoundaryMode::Symmetric, exec);
}

std::vector<ImageTensor> prepare_batch(const std::vector<ImageTensor>& images, const DomainKind& domain,
                                       std::size_t side, Exec exec) {
    std::vector<ImageTensor> out(images.size());
    const long n = static_cast<long>(images.size());
    // Errors cannot leave an OpenMP region; the first one is rethrown afterwards.
    std::vector<std::exception_ptr> errors(images.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
    for (long i = 0; i < n; ++i) {
        try {
            out[i] = prepare(images[i], domain, side, Exec::Serial);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

} // namespace wgfd
