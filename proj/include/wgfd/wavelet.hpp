#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wgfd/exec.hpp"
#include "wgfd/plane.hpp"

namespace wgfd::wavelet {

// Orthonormal two-channel filter bank. Analysis is written in correlation
// form: approx[k] = sum_j dec_lo[j] * x[start_k + j].
struct FilterBank {
    std::string name;
    std::vector<double> dec_lo;
    std::vector<double> dec_hi;
    std::vector<double> rec_lo;
    std::vector<double> rec_hi;
    int vanishing_moments = 0;

    std::size_t length() const { return dec_lo.size(); }
};

enum class BoundaryMode {
    Periodization, // circular; odd lengths padded by repeating the last sample
    Symmetric,     // whole-sample mirror: ... c b | a b c d | c b ...
};

std::string_view to_string(BoundaryMode mode);
BoundaryMode parse_boundary_mode(std::string_view text);

// Lookup is case-insensitive. Throws UnknownWaveletError.
FilterBank filter_bank(std::string_view name);

bool is_supported(std::string_view name);

// Number of coefficients per band produced for a length-n signal.
std::size_t coefficient_count(std::size_t n, std::size_t filter_length, BoundaryMode mode);

// Signal length reconstructed by default from k coefficients per band.
std::size_t default_signal_length(std::size_t k, std::size_t filter_length, BoundaryMode mode);

struct Dwt1d {
    std::vector<double> approx;
    std::vector<double> detail;
};

Dwt1d dwt1d(std::span<const double> signal, const FilterBank& fb, BoundaryMode mode);

// `length` selects the reconstructed length when it is ambiguous (odd
// sources); defaults to default_signal_length().
std::vector<double> idwt1d(std::span<const double> approx, std::span<const double> detail,
                           const FilterBank& fb, BoundaryMode mode,
                           std::optional<std::size_t> length = std::nullopt);

// One-level 2D decomposition. LH = low-pass along rows then high-pass along
// columns (horizontal edges), HL = high-pass rows then low-pass columns.
struct SubbandQuad {
    Plane ll, lh, hl, hh;
    std::size_t source_rows = 0;
    std::size_t source_cols = 0;
};

SubbandQuad dwt2d(const Plane& plane, const FilterBank& fb, BoundaryMode mode,
                  Exec exec = Exec::Parallel);

Plane idwt2d(const SubbandQuad& quad, const FilterBank& fb, BoundaryMode mode,
             Exec exec = Exec::Parallel);

struct DetailLevel {
    Plane lh, hl, hh;
    std::size_t source_rows = 0;
    std::size_t source_cols = 0;
};

// levels[0] is the finest scale.
struct WaveletPyramid {
    std::vector<DetailLevel> levels;
    Plane ll_final;
};

// Largest level count for which every level's input satisfies dwt2d's
// preconditions and the coarsest approximation is at least 2x2.
int max_levels(std::size_t rows, std::size_t cols, const FilterBank& fb, BoundaryMode mode);

WaveletPyramid wavedec2(const Plane& plane, const FilterBank& fb, int levels, BoundaryMode mode,
                        Exec exec = Exec::Parallel);

Plane waverec2(const WaveletPyramid& pyramid, const FilterBank& fb, BoundaryMode mode,
               Exec exec = Exec::Parallel);

} // namespace wgfd::wavelet
