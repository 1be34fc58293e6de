#include "wgfd/synth.hpp"

#include <algorithm>
#include <cmath>

#include "wgfd/error.hpp"

namespace wgfd {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    if (sigma <= 0.0) return {1.0};
    const auto radius = static_cast<long>(std::max(1.0, std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (long i = -radius; i <= radius; ++i) {
        const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

std::size_t reflect(long i, std::size_t n) {
    const long period = 2 * static_cast<long>(n);
    long r = i % period;
    if (r < 0) r += period;
    if (r >= static_cast<long>(n)) r = period - 1 - r;
    return static_cast<std::size_t>(r);
}

// Unit-variance smooth field: blurred white noise divided by the blurred
// standard deviation of an unbounded plane (sum of squared 2D taps). Fields
// much smoother than the image come out nearly flat.
Plane smooth_field(std::size_t side, double sigma, Rng& rng) {
    Plane white(side, side);
    for (auto& v : white.data) v = rng.normal();
    const auto k = gaussian_kernel(sigma);
    double k2 = 0.0;
    for (double v : k) k2 += v * v;
    Plane f = gaussian_blur(white, sigma);
    for (auto& v : f.data) v /= k2;
    return f;
}

// Three colour channels sharing a luminance field.
std::array<Plane, 3> colour_texture(std::size_t side, double sigma, Rng& rng) {
    const Plane lum = smooth_field(side, sigma, rng);
    std::array<Plane, 3> ch;
    for (auto& c : ch) {
        const Plane chroma = smooth_field(side, sigma, rng);
        c = Plane(side, side);
        for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] = 0.8 * lum.data[i] + 0.6 * chroma.data[i];
    }
    return ch;
}

double mean_of(const std::array<Plane, 3>& ch) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& c : ch) {
        for (double v : c.data) s += v;
        n += c.data.size();
    }
    return s / static_cast<double>(n);
}

ImageTensor finish(std::array<Plane, 3>& ch, double noise_sigma, Rng& rng) {
    const double mu = mean_of(ch);
    const std::size_t side = ch[0].rows;
    ImageTensor img(side, side, 3);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < side * side; ++i) img.data[i * 3 + c] = ch[c].data[i] - mu + 0.5;
    }
    if (noise_sigma > 0.0) {
        for (auto& v : img.data) v += noise_sigma * rng.normal();
    }
    for (auto& v : img.data) v = std::clamp(v, 0.0, 1.0);
    return img;
}

} // namespace

void SynthConfig::validate() const {
    if (side < 2 || side % 2 != 0) throw InvalidArgument("synth side must be even and >= 2");
    if (blur_sigma < 0 || noise_sigma < 0) throw InvalidArgument("synth sigmas must be non-negative");
}

Plane gaussian_blur(const Plane& p, double sigma) {
    const auto k = gaussian_kernel(sigma);
    if (k.size() == 1) return p;
    const long radius = static_cast<long>(k.size() / 2);
    Plane tmp(p.rows, p.cols);
    for (std::size_t r = 0; r < p.rows; ++r) {
        for (std::size_t c = 0; c < p.cols; ++c) {
            double s = 0.0;
            for (long i = -radius; i <= radius; ++i)
                s += k[static_cast<std::size_t>(i + radius)] * p(r, reflect(static_cast<long>(c) + i, p.cols));
            tmp(r, c) = s;
        }
    }
    Plane out(p.rows, p.cols);
    for (std::size_t r = 0; r < p.rows; ++r) {
        for (std::size_t c = 0; c < p.cols; ++c) {
            double s = 0.0;
            for (long i = -radius; i <= radius; ++i)
                s += k[static_cast<std::size_t>(i + radius)] * tmp(reflect(static_cast<long>(r) + i, p.rows), c);
            out(r, c) = s;
        }
    }
    return out;
}

ImageTensor synth_real(const SynthConfig& cfg, Rng& rng) {
    cfg.validate();
    auto ch = colour_texture(cfg.side, cfg.blur_sigma, rng);
    for (auto& c : ch)
        for (auto& v : c.data) v *= kTextureStd;
    return finish(ch, cfg.noise_sigma, rng);
}

ImageTensor synth_fake(const SynthConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t half = cfg.side / 2;
    const auto base = colour_texture(half, cfg.blur_sigma / 2.0, rng);
    std::array<Plane, 3> up;
    for (std::size_t c = 0; c < 3; ++c) {
        const Plane& b = base[c];
        up[c] = Plane(cfg.side, cfg.side);
        // Zero insertion then the separable triangle [1/2, 1, 1/2]: even output
        // samples copy the base, odd ones average their two neighbours.
        auto tap = [&](std::size_t y, std::size_t x) {
            const std::size_t y0 = y / 2, x0 = x / 2;
            const std::size_t y1 = std::min(y0 + (y % 2), half - 1);
            const std::size_t x1 = std::min(x0 + (x % 2), half - 1);
            return 0.25 * (b(y0, x0) + b(y0, x1) + b(y1, x0) + b(y1, x1));
        };
        for (std::size_t y = 0; y < cfg.side; ++y) {
            for (std::size_t x = 0; x < cfg.side; ++x) {
                const double v = 0.5 + kTextureStd * tap(y, x);
                // Per-phase gain of the transpose convolution; unequal gains
                // leave the checkerboard imprint of naive up-sampling.
                const double gain = cfg.upsample_kernel[(y % 2) * 2 + (x % 2)];
                const double parity = (x + y) % 2 == 0 ? 1.0 : -1.0;
                up[c](y, x) = v * gain + cfg.artifact_gain * parity;
            }
        }
    }
    return finish(up, cfg.noise_sigma, rng);
}

ImageTensor synth_item(const DatasetItem& item, const SynthConfig& cfg) {
    if (!item.seed) throw InvalidArgument("synthetic item has no seed");
    Rng rng(*item.seed);
    return item.label == Label::Real ? synth_real(cfg, rng) : synth_fake(cfg, rng);
}

SynthDataset build_synth_dataset(std::size_t n_per_class, const SynthConfig& cfg, std::uint64_t seed, Exec exec) {
    if (n_per_class == 0) throw InvalidArgument("n_per_class must be >= 1");
    cfg.validate();
    SynthDataset ds;
    for (int label = 0; label < 2; ++label) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            ds.items.push_back({"synth", static_cast<Label>(label), "synthetic",
                                derive_seed({seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(label)})});
        }
    }
    ds.images.resize(ds.items.size());
    const long n = static_cast<long>(ds.items.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
    for (long i = 0; i < n; ++i) ds.images[i] = synth_item(ds.items[i], cfg);
    return ds;
}

} // namespace wgfd
