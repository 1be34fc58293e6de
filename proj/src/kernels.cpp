#include "wgfd/kernels.hpp"

#include <algorithm>
#include <vector>

namespace wgfd::kernels {

namespace {

// Valid output range [lo, hi) for an offset `d` so that 0 <= i + d < side.
inline std::size_t lo_for(long d) { return d < 0 ? static_cast<std::size_t>(-d) : 0; }
inline std::size_t hi_for(long d, std::size_t side) {
    return d > 0 ? side - static_cast<std::size_t>(d) : side;
}

} // namespace

namespace {

// Patch matrix: row r = (ci, ky, kx) holds the input plane shifted by
// (ky - pad, kx - pad) with zeros outside, so the convolution becomes
// long row-axpys and dot products over whole planes.
template <typename Real>
void im2col(const Real* in, std::size_t c_in, std::size_t side, std::size_t k, Real* patches) {
    const std::size_t plane = side * side;
    const long pad = static_cast<long>(k / 2);
    for (std::size_t ci = 0; ci < c_in; ++ci) {
        const Real* src = in + ci * plane;
        for (std::size_t ky = 0; ky < k; ++ky) {
            const long dy = static_cast<long>(ky) - pad;
            const std::size_t y0 = lo_for(dy), y1 = hi_for(dy, side);
            for (std::size_t kx = 0; kx < k; ++kx) {
                const long dx = static_cast<long>(kx) - pad;
                const std::size_t x0 = lo_for(dx), x1 = hi_for(dx, side);
                Real* row = patches + ((ci * k + ky) * k + kx) * plane;
                std::fill(row, row + plane, Real(0));
                for (std::size_t y = y0; y < y1; ++y) {
                    const Real* irow = src + static_cast<std::size_t>(static_cast<long>(y) + dy) * side + dx;
                    std::copy(irow + x0, irow + x1, row + y * side + x0);
                }
            }
        }
    }
}

template <typename Real>
void col2im_add(const Real* patches, std::size_t c_in, std::size_t side, std::size_t k, Real* d_in) {
    const std::size_t plane = side * side;
    const long pad = static_cast<long>(k / 2);
    for (std::size_t ci = 0; ci < c_in; ++ci) {
        Real* dst = d_in + ci * plane;
        for (std::size_t ky = 0; ky < k; ++ky) {
            const long dy = static_cast<long>(ky) - pad;
            const std::size_t y0 = lo_for(dy), y1 = hi_for(dy, side);
            for (std::size_t kx = 0; kx < k; ++kx) {
                const long dx = static_cast<long>(kx) - pad;
                const std::size_t x0 = lo_for(dx), x1 = hi_for(dx, side);
                const Real* row = patches + ((ci * k + ky) * k + kx) * plane;
                for (std::size_t y = y0; y < y1; ++y) {
                    Real* drow = dst + static_cast<std::size_t>(static_cast<long>(y) + dy) * side + dx;
                    const Real* prow = row + y * side;
                    for (std::size_t x = x0; x < x1; ++x) drow[x] += prow[x];
                }
            }
        }
    }
}

template <typename Real>
Real dot(const Real* a, const Real* b, std::size_t n) {
    Real acc = 0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

} // namespace

template <typename Real>
void conv_forward(std::span<const Real> in, std::size_t c_in, std::size_t side, std::span<const Real> weight,
                  std::span<const Real> bias, std::size_t c_out, std::size_t k, std::span<Real> out) {
    const std::size_t plane = side * side;
    const std::size_t rows = c_in * k * k;
    std::vector<Real> patches(rows * plane);
    im2col(in.data(), c_in, side, k, patches.data());
    for (std::size_t co = 0; co < c_out; ++co) {
        Real* o = out.data() + co * plane;
        std::fill(o, o + plane, bias[co]);
        const Real* w = weight.data() + co * rows;
        for (std::size_t r = 0; r < rows; ++r) {
            const Real wv = w[r];
            const Real* p = patches.data() + r * plane;
#pragma omp simd
            for (std::size_t i = 0; i < plane; ++i) o[i] += wv * p[i];
        }
    }
}

template <typename Real>
void conv_backward(std::span<const Real> in, std::size_t c_in, std::size_t side, std::span<const Real> weight,
                   std::size_t c_out, std::size_t k, std::span<const Real> d_out, std::span<double> d_weight,
                   std::span<double> d_bias, std::span<Real> d_in) {
    const std::size_t plane = side * side;
    const std::size_t rows = c_in * k * k;
    std::vector<Real> patches(rows * plane);
    im2col(in.data(), c_in, side, k, patches.data());

    for (std::size_t co = 0; co < c_out; ++co) {
        const Real* g = d_out.data() + co * plane;
        double bsum = 0.0;
        for (std::size_t i = 0; i < plane; ++i) bsum += static_cast<double>(g[i]);
        d_bias[co] += bsum;
        double* dw = d_weight.data() + co * rows;
        for (std::size_t r = 0; r < rows; ++r)
            dw[r] += static_cast<double>(dot(g, patches.data() + r * plane, plane));
    }

    if (d_in.empty()) return;
    // Reuse the patch buffer for the patch-space input gradient.
    for (std::size_t r = 0; r < rows; ++r) {
        Real* dp = patches.data() + r * plane;
        std::fill(dp, dp + plane, Real(0));
        for (std::size_t co = 0; co < c_out; ++co) {
            const Real wv = weight[co * rows + r];
            const Real* g = d_out.data() + co * plane;
#pragma omp simd
            for (std::size_t i = 0; i < plane; ++i) dp[i] += wv * g[i];
        }
    }
    std::fill(d_in.begin(), d_in.end(), Real(0));
    col2im_add(patches.data(), c_in, side, k, d_in.data());
}

template <typename Real>
void relu_maxpool_forward(std::span<const Real> pre, std::size_t channels, std::size_t side, std::span<Real> out,
                          std::span<std::uint32_t> argmax) {
    const std::size_t half = side / 2;
    for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t base = c * side * side;
        for (std::size_t y = 0; y < half; ++y) {
            for (std::size_t x = 0; x < half; ++x) {
                const std::size_t i00 = base + (2 * y) * side + 2 * x;
                std::size_t best = i00;
                for (std::size_t cand : {i00 + 1, i00 + side, i00 + side + 1}) {
                    if (pre[cand] > pre[best]) best = cand;
                }
                const std::size_t o = (c * half + y) * half + x;
                out[o] = std::max(pre[best], Real(0));
                argmax[o] = static_cast<std::uint32_t>(best);
            }
        }
    }
}

template <typename Real>
void relu_maxpool_backward(std::span<const Real> pre, std::span<const std::uint32_t> argmax,
                           std::span<const Real> d_out, std::span<Real> d_pre) {
    std::fill(d_pre.begin(), d_pre.end(), Real(0));
    for (std::size_t o = 0; o < d_out.size(); ++o) {
        const std::uint32_t i = argmax[o];
        if (pre[i] > Real(0)) d_pre[i] += d_out[o];
    }
}

template <typename Real>
void conv_forward_reference(std::span<const Real> in, std::size_t c_in, std::size_t side,
                            std::span<const Real> weight, std::span<const Real> bias, std::size_t c_out,
                            std::size_t k, std::span<Real> out) {
    const long pad = static_cast<long>(k / 2);
    const long s = static_cast<long>(side);
    for (std::size_t co = 0; co < c_out; ++co) {
        for (long y = 0; y < s; ++y) {
            for (long x = 0; x < s; ++x) {
                double acc = static_cast<double>(bias[co]);
                for (std::size_t ci = 0; ci < c_in; ++ci) {
                    for (long ky = 0; ky < static_cast<long>(k); ++ky) {
                        for (long kx = 0; kx < static_cast<long>(k); ++kx) {
                            const long iy = y + ky - pad, ix = x + kx - pad;
                            if (iy < 0 || iy >= s || ix < 0 || ix >= s) continue;
                            acc += static_cast<double>(weight[((co * c_in + ci) * k + ky) * k + kx]) *
                                   static_cast<double>(in[(ci * side + iy) * side + ix]);
                        }
                    }
                }
                out[(co * side + y) * side + x] = static_cast<Real>(acc);
            }
        }
    }
}

template <typename Real>
void conv_backward_reference(std::span<const Real> in, std::size_t c_in, std::size_t side,
                             std::span<const Real> weight, std::size_t c_out, std::size_t k,
                             std::span<const Real> d_out, std::span<double> d_weight, std::span<double> d_bias,
                             std::span<Real> d_in) {
    const long pad = static_cast<long>(k / 2);
    const long s = static_cast<long>(side);
    std::vector<double> din(d_in.size(), 0.0);
    for (std::size_t co = 0; co < c_out; ++co) {
        for (long y = 0; y < s; ++y) {
            for (long x = 0; x < s; ++x) {
                const double g = static_cast<double>(d_out[(co * side + y) * side + x]);
                d_bias[co] += g;
                for (std::size_t ci = 0; ci < c_in; ++ci) {
                    for (long ky = 0; ky < static_cast<long>(k); ++ky) {
                        for (long kx = 0; kx < static_cast<long>(k); ++kx) {
                            const long iy = y + ky - pad, ix = x + kx - pad;
                            if (iy < 0 || iy >= s || ix < 0 || ix >= s) continue;
                            const std::size_t wi = ((co * c_in + ci) * k + ky) * k + kx;
                            const std::size_t ii = (ci * side + iy) * side + ix;
                            d_weight[wi] += g * static_cast<double>(in[ii]);
                            if (!din.empty()) din[ii] += g * static_cast<double>(weight[wi]);
                        }
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < din.size(); ++i) d_in[i] = static_cast<Real>(din[i]);
}

#define WGFD_INSTANTIATE(Real)                                                                                  \
    template void conv_forward<Real>(std::span<const Real>, std::size_t, std::size_t, std::span<const Real>,    \
                                     std::span<const Real>, std::size_t, std::size_t, std::span<Real>);          \
    template void conv_backward<Real>(std::span<const Real>, std::size_t, std::size_t, std::span<const Real>,   \
                                      std::size_t, std::size_t, std::span<const Real>, std::span<double>,        \
                                      std::span<double>, std::span<Real>);                                       \
    template void relu_maxpool_forward<Real>(std::span<const Real>, std::size_t, std::size_t, std::span<Real>,  \
                                             std::span<std::uint32_t>);                                          \
    template void relu_maxpool_backward<Real>(std::span<const Real>, std::span<const std::uint32_t>,            \
                                              std::span<const Real>, std::span<Real>);                           \
    template void conv_forward_reference<Real>(std::span<const Real>, std::size_t, std::size_t,                 \
                                               std::span<const Real>, std::span<const Real>, std::size_t,        \
                                               std::size_t, std::span<Real>);                                    \
    template void conv_backward_reference<Real>(std::span<const Real>, std::size_t, std::size_t,                \
                                                std::span<const Real>, std::size_t, std::size_t,                 \
                                                std::span<const Real>, std::span<double>, std::span<double>,     \
                                                std::span<Real>);

WGFD_INSTANTIATE(float)
WGFD_INSTANTIATE(double)

#undef WGFD_INSTANTIATE

} // namespace wgfd::kernels
