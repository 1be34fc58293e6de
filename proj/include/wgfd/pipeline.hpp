#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wgfd/exec.hpp"
#include "wgfd/image.hpp"
#include "wgfd/wavelet.hpp"

namespace wgfd {

// Classifier input domain: raw pixels, or the one-level sub-band mosaic of a
// supported wavelet.
class DomainKind {
public:
    static DomainKind spatial() { return DomainKind(); }
    static DomainKind wavelet(std::string_view name); // throws UnknownWaveletError

    // "spatial", "haar" or "db2" (case-insensitive).
    static DomainKind parse(std::string_view text);

    bool is_spatial() const { return !wavelet_; }
    const std::string& wavelet_name() const { return *wavelet_; }
    std::string label() const { return wavelet_ ? *wavelet_ : "spatial"; }

    friend bool operator==(const DomainKind&, const DomainKind&) = default;

private:
    std::optional<std::string> wavelet_;
};

// Per channel: one-level dwt2d, bands mapped LL -> LL/2 and detail -> d/2 + 0.5,
// clamped to [0,1] and tiled as [[LL, LH], [HL, HH]]. Requires even height and
// width. In symmetric mode the bands are cropped to the H/2 x W/2 coefficients
// whose filter windows start inside the image.
ImageTensor subband_mosaic(const ImageTensor& img, const wavelet::FilterBank& fb, wavelet::BoundaryMode mode,
                           Exec exec = Exec::Parallel);

// Resize to side x side (3 channels) and map into `domain`.
ImageTensor prepare(const ImageTensor& img, const DomainKind& domain, std::size_t side,
                    Exec exec = Exec::Parallel);

// prepare() over a batch; output order matches input order.
std::vector<ImageTensor> prepare_batch(const std::vector<ImageTensor>& images, const DomainKind& domain,
                                       std::size_t side, Exec exec = Exec::Parallel);

} // namespace wgfd
