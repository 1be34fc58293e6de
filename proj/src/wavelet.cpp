#include "wgfd/wavelet.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "wgfd/error.hpp"

namespace wgfd::wavelet {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

FilterBank from_lowpass(std::string name, std::vector<double> lo, int moments) {
    FilterBank fb;
    fb.name = std::move(name);
    const std::size_t len = lo.size();
    fb.dec_hi.resize(len);
    for (std::size_t k = 0; k < len; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        fb.dec_hi[k] = sign * lo[len - 1 - k];
    }
    fb.rec_lo.assign(lo.rbegin(), lo.rend());
    fb.rec_hi.assign(fb.dec_hi.rbegin(), fb.dec_hi.rend());
    fb.dec_lo = std::move(lo);
    fb.vanishing_moments = moments;
    return fb;
}

// Input index read by tap j of output coefficient k, after boundary extension.
struct AnalysisTable {
    std::size_t count = 0; // coefficients per band
    std::size_t taps = 0;
    std::vector<std::size_t> index; // count * taps

    std::size_t at(std::size_t k, std::size_t j) const { return index[k * taps + j]; }
};

// For each output sample: the (coefficient, tap) pairs that contribute.
struct SynthesisTable {
    std::size_t length = 0;
    std::size_t pairs = 0; // taps / 2
    std::vector<std::size_t> coeff;
    std::vector<std::size_t> tap;
};

std::size_t extend(long i, std::size_t n, BoundaryMode mode) {
    if (mode == BoundaryMode::Periodization) {
        const long period = static_cast<long>(n + (n & 1U));
        long r = i % period;
        if (r < 0) r += period;
        return std::min(static_cast<std::size_t>(r), n - 1);
    }
    if (n == 1) return 0;
    const long period = 2 * static_cast<long>(n) - 2;
    long r = i % period;
    if (r < 0) r += period;
    if (r >= static_cast<long>(n)) r = period - r;
    return static_cast<std::size_t>(r);
}

long window_start(std::size_t k, std::size_t taps, BoundaryMode mode) {
    const long base = 2 * static_cast<long>(k);
    return mode == BoundaryMode::Periodization ? base : base - static_cast<long>(taps - 2);
}

AnalysisTable analysis_table(std::size_t n, std::size_t taps, BoundaryMode mode) {
    AnalysisTable t;
    t.count = coefficient_count(n, taps, mode);
    t.taps = taps;
    t.index.resize(t.count * taps);
    for (std::size_t k = 0; k < t.count; ++k) {
        const long s = window_start(k, taps, mode);
        for (std::size_t j = 0; j < taps; ++j) t.index[k * taps + j] = extend(s + static_cast<long>(j), n, mode);
    }
    return t;
}

SynthesisTable synthesis_table(std::size_t n, std::size_t k_count, std::size_t taps, BoundaryMode mode) {
    SynthesisTable t;
    t.length = n;
    t.pairs = taps / 2;
    t.coeff.reserve(n * t.pairs);
    t.tap.reserve(n * t.pairs);
    const long even_len = static_cast<long>(2 * k_count);
    for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t j = m % 2; j < taps; j += 2) {
            const long diff = static_cast<long>(m) - static_cast<long>(j);
            long k;
            if (mode == BoundaryMode::Periodization) {
                long r = diff % even_len;
                if (r < 0) r += even_len;
                k = r / 2;
            } else {
                k = (diff + static_cast<long>(taps) - 2) / 2;
            }
            t.coeff.push_back(static_cast<std::size_t>(k));
            t.tap.push_back(j);
        }
    }
    return t;
}

void check_signal_length(std::size_t n, const FilterBank& fb, BoundaryMode mode) {
    if (n < 2) {
        throw InvalidArgument("signal too short: length " + std::to_string(n) + " < 2");
    }
    if (mode == BoundaryMode::Symmetric && n < fb.length()) {
        throw InvalidArgument("signal too short for symmetric mode: length " + std::to_string(n) +
                              " < filter length " + std::to_string(fb.length()));
    }
}

// Analysis of each row: out_lo/out_hi have table.count columns.
void analyze_rows(const Plane& in, const FilterBank& fb, const AnalysisTable& t, Plane& lo, Plane& hi,
                  Exec exec) {
    const long rows = static_cast<long>(in.rows);
    const std::size_t taps = t.taps;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (long r = 0; r < rows; ++r) {
        const double* x = in.data.data() + r * in.cols;
        double* a = lo.data.data() + r * lo.cols;
        double* d = hi.data.data() + r * hi.cols;
        for (std::size_t k = 0; k < t.count; ++k) {
            double sa = 0.0;
            double sd = 0.0;
            for (std::size_t j = 0; j < taps; ++j) {
                const double v = x[t.at(k, j)];
                sa += fb.dec_lo[j] * v;
                sd += fb.dec_hi[j] * v;
            }
            a[k] = sa;
            d[k] = sd;
        }
    }
}

// Analysis along columns, computed as weighted sums of whole rows. Each
// element sees the same tap order as analyze_rows.
void analyze_cols(const Plane& in, const FilterBank& fb, const AnalysisTable& t, Plane& lo, Plane& hi,
                  Exec exec) {
    const long count = static_cast<long>(t.count);
    const std::size_t cols = in.cols;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (long k = 0; k < count; ++k) {
        double* a = lo.data.data() + k * cols;
        double* d = hi.data.data() + k * cols;
        std::fill(a, a + cols, 0.0);
        std::fill(d, d + cols, 0.0);
        for (std::size_t j = 0; j < t.taps; ++j) {
            const double* x = in.data.data() + t.at(static_cast<std::size_t>(k), j) * cols;
            const double hl = fb.dec_lo[j];
            const double hh = fb.dec_hi[j];
            for (std::size_t c = 0; c < cols; ++c) {
                a[c] += hl * x[c];
                d[c] += hh * x[c];
            }
        }
    }
}

void synthesize_rows(const Plane& lo, const Plane& hi, const FilterBank& fb, const SynthesisTable& t,
                     Plane& out, Exec exec) {
    const long rows = static_cast<long>(out.rows);
    const std::size_t taps = fb.length();
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (long r = 0; r < rows; ++r) {
        const double* a = lo.data.data() + r * lo.cols;
        const double* d = hi.data.data() + r * hi.cols;
        double* x = out.data.data() + r * out.cols;
        for (std::size_t m = 0; m < t.length; ++m) {
            double s = 0.0;
            for (std::size_t p = 0; p < t.pairs; ++p) {
                const std::size_t k = t.coeff[m * t.pairs + p];
                const std::size_t j = t.tap[m * t.pairs + p];
                s += fb.rec_lo[taps - 1 - j] * a[k];
                s += fb.rec_hi[taps - 1 - j] * d[k];
            }
            x[m] = s;
        }
    }
}

void synthesize_cols(const Plane& lo, const Plane& hi, const FilterBank& fb, const SynthesisTable& t,
                     Plane& out, Exec exec) {
    const long length = static_cast<long>(t.length);
    const std::size_t cols = out.cols;
    const std::size_t taps = fb.length();
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (long m = 0; m < length; ++m) {
        double* x = out.data.data() + m * cols;
        std::fill(x, x + cols, 0.0);
        for (std::size_t p = 0; p < t.pairs; ++p) {
            const std::size_t k = t.coeff[static_cast<std::size_t>(m) * t.pairs + p];
            const std::size_t j = t.tap[static_cast<std::size_t>(m) * t.pairs + p];
            const double gl = fb.rec_lo[taps - 1 - j];
            const double gh = fb.rec_hi[taps - 1 - j];
            const double* a = lo.data.data() + k * cols;
            const double* d = hi.data.data() + k * cols;
            for (std::size_t c = 0; c < cols; ++c) {
                x[c] += gl * a[c];
                x[c] += gh * d[c];
            }
        }
    }
}

} // namespace

std::string_view to_string(BoundaryMode mode) {
    return mode == BoundaryMode::Periodization ? "periodization" : "symmetric";
}

BoundaryMode parse_boundary_mode(std::string_view text) {
    const auto s = lowercase(text);
    if (s == "periodization" || s == "per") return BoundaryMode::Periodization;
    if (s == "symmetric" || s == "sym") return BoundaryMode::Symmetric;
    throw InvalidArgument("unknown boundary mode '" + std::string(text) + "'");
}

FilterBank filter_bank(std::string_view name) {
    const auto key = lowercase(name);
    if (key == "haar") {
        const double s = 1.0 / std::sqrt(2.0);
        return from_lowpass("haar", {s, s}, 1);
    }
    if (key == "db2") {
        const double r3 = std::sqrt(3.0);
        const double den = 4.0 * std::sqrt(2.0);
        return from_lowpass("db2", {(1.0 + r3) / den, (3.0 + r3) / den, (3.0 - r3) / den, (1.0 - r3) / den}, 2);
    }
    throw UnknownWaveletError(std::string(name));
}

bool is_supported(std::string_view name) {
    const auto key = lowercase(name);
    return key == "haar" || key == "db2";
}

std::size_t coefficient_count(std::size_t n, std::size_t filter_length, BoundaryMode mode) {
    if (mode == BoundaryMode::Periodization) return (n + 1) / 2;
    return (n + filter_length - 1) / 2;
}

std::size_t default_signal_length(std::size_t k, std::size_t filter_length, BoundaryMode mode) {
    if (mode == BoundaryMode::Periodization) return 2 * k;
    return 2 * k + 2 - filter_length;
}

Dwt1d dwt1d(std::span<const double> signal, const FilterBank& fb, BoundaryMode mode) {
    check_signal_length(signal.size(), fb, mode);
    const auto t = analysis_table(signal.size(), fb.length(), mode);
    Dwt1d out{std::vector<double>(t.count), std::vector<double>(t.count)};
    for (std::size_t k = 0; k < t.count; ++k) {
        double sa = 0.0;
        double sd = 0.0;
        for (std::size_t j = 0; j < t.taps; ++j) {
            const double v = signal[t.at(k, j)];
            sa += fb.dec_lo[j] * v;
            sd += fb.dec_hi[j] * v;
        }
        out.approx[k] = sa;
        out.detail[k] = sd;
    }
    return out;
}

std::vector<double> idwt1d(std::span<const double> approx, std::span<const double> detail,
                           const FilterBank& fb, BoundaryMode mode, std::optional<std::size_t> length) {
    if (approx.size() != detail.size()) {
        throw InvalidArgument("length mismatch: approx has " + std::to_string(approx.size()) +
                              " coefficients, detail has " + std::to_string(detail.size()));
    }
    const std::size_t k = approx.size();
    const std::size_t n = length.value_or(default_signal_length(k, fb.length(), mode));
    if (k == 0 || coefficient_count(n, fb.length(), mode) != k) {
        throw InvalidArgument("length mismatch: " + std::to_string(k) +
                              " coefficients cannot reconstruct a length-" + std::to_string(n) + " signal");
    }
    const auto t = synthesis_table(n, k, fb.length(), mode);
    const std::size_t taps = fb.length();
    std::vector<double> x(n);
    for (std::size_t m = 0; m < n; ++m) {
        double s = 0.0;
        for (std::size_t p = 0; p < t.pairs; ++p) {
            const std::size_t c = t.coeff[m * t.pairs + p];
            const std::size_t j = t.tap[m * t.pairs + p];
            s += fb.rec_lo[taps - 1 - j] * approx[c];
            s += fb.rec_hi[taps - 1 - j] * detail[c];
        }
        x[m] = s;
    }
    return x;
}

SubbandQuad dwt2d(const Plane& plane, const FilterBank& fb, BoundaryMode mode, Exec exec) {
    if (plane.rows < 2 || plane.cols < 2 || plane.data.size() != plane.rows * plane.cols) {
        throw InvalidArgument("degenerate plane shape " + std::to_string(plane.rows) + "x" +
                              std::to_string(plane.cols) + " (need at least 2x2)");
    }
    check_signal_length(plane.rows, fb, mode);
    check_signal_length(plane.cols, fb, mode);

    const auto row_t = analysis_table(plane.cols, fb.length(), mode);
    const auto col_t = analysis_table(plane.rows, fb.length(), mode);

    Plane lo(plane.rows, row_t.count);
    Plane hi(plane.rows, row_t.count);
    analyze_rows(plane, fb, row_t, lo, hi, exec);

    SubbandQuad q;
    q.source_rows = plane.rows;
    q.source_cols = plane.cols;
    q.ll = Plane(col_t.count, row_t.count);
    q.lh = Plane(col_t.count, row_t.count);
    q.hl = Plane(col_t.count, row_t.count);
    q.hh = Plane(col_t.count, row_t.count);
    analyze_cols(lo, fb, col_t, q.ll, q.lh, exec);
    analyze_cols(hi, fb, col_t, q.hl, q.hh, exec);
    return q;
}

Plane idwt2d(const SubbandQuad& quad, const FilterBank& fb, BoundaryMode mode, Exec exec) {
    const Plane& ll = quad.ll;
    if (!ll.same_shape(quad.lh) || !ll.same_shape(quad.hl) || !ll.same_shape(quad.hh) || ll.rows == 0 ||
        ll.cols == 0) {
        throw InvalidArgument("shape mismatch: sub-band planes must share one non-empty shape");
    }
    const std::size_t taps = fb.length();
    const std::size_t rows = quad.source_rows ? quad.source_rows : default_signal_length(ll.rows, taps, mode);
    const std::size_t cols = quad.source_cols ? quad.source_cols : default_signal_length(ll.cols, taps, mode);
    if (coefficient_count(rows, taps, mode) != ll.rows || coefficient_count(cols, taps, mode) != ll.cols) {
        throw InvalidArgument("shape mismatch: " + std::to_string(ll.rows) + "x" + std::to_string(ll.cols) +
                              " bands cannot reconstruct a " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " plane");
    }

    const auto col_t = synthesis_table(rows, ll.rows, taps, mode);
    const auto row_t = synthesis_table(cols, ll.cols, taps, mode);

    Plane lo(rows, ll.cols);
    Plane hi(rows, ll.cols);
    synthesize_cols(quad.ll, quad.lh, fb, col_t, lo, exec);
    synthesize_cols(quad.hl, quad.hh, fb, col_t, hi, exec);

    Plane out(rows, cols);
    synthesize_rows(lo, hi, fb, row_t, out, exec);
    return out;
}

int max_levels(std::size_t rows, std::size_t cols, const FilterBank& fb, BoundaryMode mode) {
    const std::size_t min_len = mode == BoundaryMode::Symmetric ? std::max<std::size_t>(2, fb.length()) : 2;
    int levels = 0;
    while (rows >= min_len && cols >= min_len) {
        const std::size_t r = coefficient_count(rows, fb.length(), mode);
        const std::size_t c = coefficient_count(cols, fb.length(), mode);
        if (r < 2 || c < 2) break;
        ++levels;
        rows = r;
        cols = c;
    }
    return levels;
}

WaveletPyramid wavedec2(const Plane& plane, const FilterBank& fb, int levels, BoundaryMode mode, Exec exec) {
    if (levels < 1) throw InvalidArgument("levels must be >= 1, got " + std::to_string(levels));
    const int feasible = max_levels(plane.rows, plane.cols, fb, mode);
    if (levels > feasible) {
        throw InvalidArgument("too many levels: " + std::to_string(levels) + " requested, at most " +
                              std::to_string(feasible) + " feasible for a " + std::to_string(plane.rows) + "x" +
                              std::to_string(plane.cols) + " plane");
    }
    WaveletPyramid pyr;
    Plane current = plane;
    for (int lvl = 0; lvl < levels; ++lvl) {
        auto q = dwt2d(current, fb, mode, exec);
        pyr.levels.push_back({std::move(q.lh), std::move(q.hl), std::move(q.hh), q.source_rows, q.source_cols});
        current = std::move(q.ll);
    }
    pyr.ll_final = std::move(current);
    return pyr;
}

Plane waverec2(const WaveletPyramid& pyramid, const FilterBank& fb, BoundaryMode mode, Exec exec) {
    Plane current = pyramid.ll_final;
    for (auto it = pyramid.levels.rbegin(); it != pyramid.levels.rend(); ++it) {
        SubbandQuad q{std::move(current), it->lh, it->hl, it->hh, it->source_rows, it->source_cols};
        current = idwt2d(q, fb, mode, exec);
    }
    return current;
}

} // namespace wgfd::wavelet
