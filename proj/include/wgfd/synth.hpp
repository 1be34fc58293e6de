#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wgfd/dataset.hpp"
#include "wgfd/exec.hpp"
#include "wgfd/image.hpp"
#include "wgfd/rng.hpp"

namespace wgfd {

// Desk-scale stand-in for real photographs and GAN outputs.
//
// Real: a smooth Gaussian random field (white noise blurred with blur_sigma),
// scaled to a fixed texture contrast, centred on 0.5, plus i.i.d. sensor
// noise. Fake: the same kind of field generated at half resolution, upsampled
// x2 by zero insertion and a 2x2 kernel (transpose-convolution style), plus
// an alternating-parity residual of amplitude artifact_gain, centred on 0.5,
// plus the same sensor noise. Both classes share first and second moments;
// the difference sits at the Nyquist frequency.
struct SynthConfig {
    std::size_t side = 64;
    double blur_sigma = 2.0;
    double noise_sigma = 0.02;
    // Row-major taps [k00, k01, k10, k11]; mean 1 keeps brightness.
    std::array<double, 4> upsample_kernel = {1.0, 1.0, 1.0, 1.0};
    double artifact_gain = 0.03;

    void validate() const;
};

// Standard deviation of the smooth texture before noise.
inline constexpr double kTextureStd = 0.15;

ImageTensor synth_real(const SynthConfig& cfg, Rng& rng);
ImageTensor synth_fake(const SynthConfig& cfg, Rng& rng);

// Separable Gaussian blur with half-sample reflect boundaries. sigma == 0 is the identity.
Plane gaussian_blur(const Plane& p, double sigma);

struct SynthDataset {
    std::vector<DatasetItem> items; // n reals followed by n fakes
    std::vector<ImageTensor> images;
};

// Item seeds are derived from (seed, index, label), so each image is
// independent of generation order and thread count.
SynthDataset build_synth_dataset(std::size_t n_per_class, const SynthConfig& cfg, std::uint64_t seed,
                                 Exec exec = Exec::Parallel);

ImageTensor synth_item(const DatasetItem& item, const SynthConfig& cfg);

} // namespace wgfd
