#include "wgfd/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wgfd/error.hpp"

namespace wgfd {

namespace {

std::size_t reflect(long i, std::size_t n) {
    const long period = 2 * static_cast<long>(n);
    long r = i % period;
    if (r < 0) r += period;
    if (r >= static_cast<long>(n)) r = period - 1 - r;
    return static_cast<std::size_t>(r);
}

} // namespace

void AugmentConfig::validate() const {
    if (max_rotation_deg < 0 || max_shift_frac < 0 || max_zoom_frac < 0) {
        throw InvalidArgument("augmentation magnitudes must be non-negative");
    }
    if (max_zoom_frac >= 1.0) throw InvalidArgument("max_zoom_frac must be below 1");
    if (!(hflip_prob >= 0.0 && hflip_prob <= 1.0)) throw InvalidArgument("hflip_prob must lie in [0,1]");
}

AugmentParams sample_augment(const AugmentConfig& cfg, std::size_t height, std::size_t width, Rng& rng) {
    cfg.validate();
    AugmentParams p;
    // Zero-width ranges draw nothing so a disabled transform is exactly the identity.
    auto draw = [&rng](double half_range) { return half_range > 0.0 ? rng.uniform(-half_range, half_range) : 0.0; };
    p.rotation_deg = draw(cfg.max_rotation_deg);
    p.shift_x = draw(cfg.max_shift_frac * static_cast<double>(width));
    p.shift_y = draw(cfg.max_shift_frac * static_cast<double>(height));
    p.zoom = 1.0 + draw(cfg.max_zoom_frac);
    p.hflip = cfg.hflip_prob > 0.0 && rng.bernoulli(cfg.hflip_prob);
    return p;
}

ImageTensor apply_augment(const ImageTensor& img, const AugmentParams& p) {
    if (img.height == 0 || img.width == 0 || img.data.size() != img.height * img.width * img.channels) {
        throw InvalidArgument("augment: invalid image shape");
    }
    ImageTensor warped;
    if (p.is_identity_warp()) {
        warped = img;
    } else {
        warped = ImageTensor(img.height, img.width, img.channels);
        const double theta = p.rotation_deg * std::numbers::pi / 180.0;
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        const double cx = (static_cast<double>(img.width) - 1.0) / 2.0;
        const double cy = (static_cast<double>(img.height) - 1.0) / 2.0;
        for (std::size_t y = 0; y < img.height; ++y) {
            for (std::size_t x = 0; x < img.width; ++x) {
                // Inverse map: undo the shift, then zoom and rotation about the centre.
                const double dx = (static_cast<double>(x) - cx - p.shift_x) / p.zoom;
                const double dy = (static_cast<double>(y) - cy - p.shift_y) / p.zoom;
                const double sx = cx + c * dx + s * dy;
                const double sy = cy - s * dx + c * dy;
                const double fx = std::floor(sx);
                const double fy = std::floor(sy);
                const double tx = sx - fx;
                const double ty = sy - fy;
                const std::size_t x0 = reflect(static_cast<long>(fx), img.width);
                const std::size_t x1 = reflect(static_cast<long>(fx) + 1, img.width);
                const std::size_t y0 = reflect(static_cast<long>(fy), img.height);
                const std::size_t y1 = reflect(static_cast<long>(fy) + 1, img.height);
                for (std::size_t ch = 0; ch < img.channels; ++ch) {
                    const double top = img.at(y0, x0, ch) * (1.0 - tx) + img.at(y0, x1, ch) * tx;
                    const double bot = img.at(y1, x0, ch) * (1.0 - tx) + img.at(y1, x1, ch) * tx;
                    warped.at(y, x, ch) = std::clamp(top * (1.0 - ty) + bot * ty, 0.0, 1.0);
                }
            }
        }
    }
    if (!p.hflip) return warped;
    ImageTensor out(img.height, img.width, img.channels);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            for (std::size_t ch = 0; ch < img.channels; ++ch) out.at(y, x, ch) = warped.at(y, img.width - 1 - x, ch);
    return out;
}

ImageTensor augment(const ImageTensor& img, const AugmentConfig& cfg, Rng& rng) {
    return apply_augment(img, sample_augment(cfg, img.height, img.width, rng));
}

} // namespace wgfd
