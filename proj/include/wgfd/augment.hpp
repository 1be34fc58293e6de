#pragma once

#include "wgfd/image.hpp"
#include "wgfd/rng.hpp"

namespace wgfd {

// Training-time geometric augmentation; fill mode is reflect (edge sample
// repeated: d c b a | a b c d | d c b a).
struct AugmentConfig {
    double max_rotation_deg = 15.0;
    double max_shift_frac = 0.10;
    double max_zoom_frac = 0.10;
    double hflip_prob = 0.5;

    void validate() const;
};

struct AugmentParams {
    double rotation_deg = 0.0;
    double shift_x = 0.0; // pixels
    double shift_y = 0.0;
    double zoom = 1.0;
    bool hflip = false;

    bool is_identity_warp() const { return rotation_deg == 0.0 && shift_x == 0.0 && shift_y == 0.0 && zoom == 1.0; }
};

// Draw order is fixed: rotation, shift_x, shift_y, zoom, flip.
AugmentParams sample_augment(const AugmentConfig& cfg, std::size_t height, std::size_t width, Rng& rng);

// One composed warp (rotate about the centre, zoom, shift) with bilinear
// sampling, followed by the optional horizontal flip.
ImageTensor apply_augment(const ImageTensor& img, const AugmentParams& p);

ImageTensor augment(const ImageTensor& img, const AugmentConfig& cfg, Rng& rng);

} // namespace wgfd
