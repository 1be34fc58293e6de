#include "wgfd/wavelet.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "wgfd/error.hpp"
#include "wgfd/rng.hpp"

using namespace wgfd;
using namespace wgfd::wavelet;

namespace {

std::vector<double> random_signal(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

Plane random_plane(Rng& rng, std::size_t r, std::size_t c) {
    Plane p(r, c);
    for (auto& x : p.data) x = rng.uniform(-1.0, 1.0);
    return p;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double energy(const Plane& p) {
    double s = 0.0;
    for (double v : p.data) s += v * v;
    return s;
}

// Newton iteration on the db2 design equations: low-pass sum sqrt(2), zeroth
// and first high-pass moments zero (g[k] = (-1)^k h[3-k]), shift-2
// orthogonality. Unit energy follows and is checked separately.
std::array<double, 4> solve_db2_by_newton() {
    std::array<double, 4> h = {0.5, 0.8, 0.2, -0.1};
    for (int it = 0; it < 50; ++it) {
        const double f[4] = {
            h[0] + h[1] + h[2] + h[3] - std::sqrt(2.0),
            h[3] - h[2] + h[1] - h[0],
            -h[2] + 2.0 * h[1] - 3.0 * h[0],
            h[0] * h[2] + h[1] * h[3],
        };
        double a[4][5] = {
            {1, 1, 1, 1, -f[0]},
            {-1, 1, -1, 1, -f[1]},
            {-3, 2, -1, 0, -f[2]},
            {h[2], h[3], h[0], h[1], -f[3]},
        };
        for (int c = 0; c < 4; ++c) {
            int piv = c;
            for (int r = c + 1; r < 4; ++r)
                if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
            for (int k = 0; k < 5; ++k) std::swap(a[c][k], a[piv][k]);
            for (int r = 0; r < 4; ++r) {
                if (r == c) continue;
                const double m = a[r][c] / a[c][c];
                for (int k = c; k < 5; ++k) a[r][k] -= m * a[c][k];
            }
        }
        for (int r = 0; r < 4; ++r) h[r] += a[r][4] / a[r][r];
    }
    return h;
}

} // namespace

TEST(FilterBank, HaarCoefficients) {
    const auto fb = filter_bank("haar");
    ASSERT_EQ(fb.length(), 2u);
    EXPECT_NEAR(fb.dec_lo[0], 0.7071067811865476, 1e-15);
    EXPECT_NEAR(fb.dec_lo[1], 0.7071067811865476, 1e-15);
    EXPECT_NEAR(fb.dec_lo[0] + fb.dec_lo[1], std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(fb.dec_lo[0] * fb.dec_lo[0] + fb.dec_lo[1] * fb.dec_lo[1], 1.0, 1e-12);
    EXPECT_EQ(fb.vanishing_moments, 1);
}

TEST(FilterBank, Db2MatchesNewtonSolutionAndClosedForm) {
    const auto fb = filter_bank("DB2");
    ASSERT_EQ(fb.length(), 4u);
    const auto solved = solve_db2_by_newton();
    const double expected[4] = {0.4829629131445341, 0.8365163037378079, 0.2241438680420134, -0.1294095225512604};
    for (int k = 0; k < 4; ++k) {
        EXPECT_NEAR(fb.dec_lo[k], solved[k], 1e-12) << k;
        EXPECT_NEAR(fb.dec_lo[k], expected[k], 1e-12) << k;
    }
    EXPECT_EQ(fb.vanishing_moments, 2);
}

TEST(FilterBank, OrthonormalityAndQmfIdentities) {
    for (const char* name : {"haar", "db2"}) {
        const auto fb = filter_bank(name);
        const std::size_t len = fb.length();
        ASSERT_EQ(fb.dec_hi.size(), len);
        ASSERT_EQ(fb.rec_lo.size(), len);
        ASSERT_EQ(fb.rec_hi.size(), len);
        EXPECT_NEAR(std::accumulate(fb.dec_lo.begin(), fb.dec_lo.end(), 0.0), std::sqrt(2.0), 1e-12);
        EXPECT_NEAR(std::inner_product(fb.dec_lo.begin(), fb.dec_lo.end(), fb.dec_lo.begin(), 0.0), 1.0, 1e-12);
        for (std::size_t shift = 2; shift < len; shift += 2) {
            double s = 0.0;
            for (std::size_t k = 0; k + shift < len; ++k) s += fb.dec_lo[k] * fb.dec_lo[k + shift];
            EXPECT_NEAR(s, 0.0, 1e-12);
        }
        for (std::size_t k = 0; k < len; ++k) {
            const double sign = k % 2 == 0 ? 1.0 : -1.0;
            EXPECT_EQ(fb.dec_hi[k], sign * fb.dec_lo[len - 1 - k]);
            EXPECT_EQ(fb.rec_lo[k], fb.dec_lo[len - 1 - k]);
            EXPECT_EQ(fb.rec_hi[k], fb.dec_hi[len - 1 - k]);
        }
    }
}

TEST(FilterBank, UnknownNameIsRejected) {
    try {
        filter_bank("sym4");
        FAIL() << "expected UnknownWaveletError";
    } catch (const UnknownWaveletError& e) {
        EXPECT_EQ(e.name(), "sym4");
        EXPECT_NE(std::string(e.what()).find("sym4"), std::string::npos);
    }
}

TEST(Dwt1d, HaarHandExample) {
    const std::vector<double> x = {4, 6, 10, 12};
    const auto r = dwt1d(x, filter_bank("haar"), BoundaryMode::Periodization);
    ASSERT_EQ(r.approx.size(), 2u);
    EXPECT_NEAR(r.approx[0], 10 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(r.approx[1], 22 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(r.detail[0], -2 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(r.detail[1], -2 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(r.approx[0], 7.0710678, 1e-7);
    EXPECT_NEAR(r.approx[1], 15.5563492, 1e-7);
}

TEST(Dwt1d, ConstantSignalHasNoHaarDetail) {
    const std::vector<double> x(16, 0.37);
    for (auto mode : {BoundaryMode::Periodization, BoundaryMode::Symmetric}) {
        for (double d : dwt1d(x, filter_bank("haar"), mode).detail) EXPECT_LT(std::abs(d), 1e-12);
    }
}

TEST(Dwt1d, Db2AnnihilatesLinearRampInInterior) {
    std::vector<double> ramp(16);
    std::iota(ramp.begin(), ramp.end(), 0.0);
    const auto fb = filter_bank("db2");
    const auto r = dwt1d(ramp, fb, BoundaryMode::Periodization);
    ASSERT_EQ(r.detail.size(), 8u);
    // Direct convolution oracle over windows that do not wrap: 2k + 3 < 16.
    for (std::size_t k = 0; 2 * k + 3 < ramp.size(); ++k) {
        double oracle = 0.0;
        for (std::size_t j = 0; j < 4; ++j) oracle += fb.dec_hi[j] * ramp[2 * k + j];
        EXPECT_NEAR(r.detail[k], oracle, 1e-12);
        EXPECT_LT(std::abs(r.detail[k]), 1e-10) << k;
    }
    // The wrap-around window sees the 15 -> 0 jump.
    EXPECT_GT(std::abs(r.detail[7]), 1.0);
}

TEST(Dwt1d, SymmetricInteriorMatchesPeriodization) {
    Rng rng(3);
    const auto x = random_signal(rng, 20);
    const auto fb = filter_bank("db2");
    const auto per = dwt1d(x, fb, BoundaryMode::Periodization);
    const auto sym = dwt1d(x, fb, BoundaryMode::Symmetric);
    ASSERT_EQ(sym.approx.size(), 11u);
    // Symmetric coefficient k+1 uses the same window as periodized coefficient k.
    for (std::size_t k = 0; k + 2 < per.approx.size(); ++k) {
        EXPECT_EQ(sym.approx[k + 1], per.approx[k]);
        EXPECT_EQ(sym.detail[k + 1], per.detail[k]);
    }
}

TEST(Dwt1d, TooShortSignals) {
    const std::vector<double> one = {1.0};
    const std::vector<double> three = {1.0, 2.0, 3.0};
    EXPECT_THROW(dwt1d(one, filter_bank("haar"), BoundaryMode::Periodization), InvalidArgument);
    EXPECT_THROW(dwt1d(three, filter_bank("db2"), BoundaryMode::Symmetric), InvalidArgument);
    EXPECT_NO_THROW(dwt1d(three, filter_bank("db2"), BoundaryMode::Periodization));
}

TEST(Idwt1d, InvertsHandExample) {
    const std::vector<double> a = {10 / std::sqrt(2.0), 22 / std::sqrt(2.0)};
    const std::vector<double> d = {-2 / std::sqrt(2.0), -2 / std::sqrt(2.0)};
    const auto x = idwt1d(a, d, filter_bank("haar"), BoundaryMode::Periodization);
    const std::vector<double> expected = {4, 6, 10, 12};
    EXPECT_LT(max_abs_diff(x, expected), 1e-9);
}

TEST(Idwt1d, ZeroCoefficientsGiveZeroSignal) {
    const std::vector<double> z(8, 0.0);
    for (const char* name : {"haar", "db2"}) {
        for (double v : idwt1d(z, z, filter_bank(name), BoundaryMode::Periodization)) EXPECT_EQ(v, 0.0);
    }
}

TEST(Idwt1d, LengthMismatch) {
    const std::vector<double> a(4, 0.0), d(3, 0.0);
    EXPECT_THROW(idwt1d(a, d, filter_bank("haar"), BoundaryMode::Periodization), InvalidArgument);
}

TEST(Idwt1d, RoundTripProperty) {
    Rng rng(11);
    for (const char* name : {"haar", "db2"}) {
        const auto fb = filter_bank(name);
        for (auto mode : {BoundaryMode::Periodization, BoundaryMode::Symmetric}) {
            double worst = 0.0;
            for (int trial = 0; trial < 1000; ++trial) {
                const auto x = random_signal(rng, 64);
                const auto c = dwt1d(x, fb, mode);
                worst = std::max(worst, max_abs_diff(idwt1d(c.approx, c.detail, fb, mode), x));
            }
            EXPECT_LT(worst, 1e-9) << name << " " << to_string(mode);
        }
    }
}

TEST(Idwt1d, OddLengthsRoundTripWithExplicitLength) {
    Rng rng(5);
    for (const char* name : {"haar", "db2"}) {
        const auto fb = filter_bank(name);
        for (auto mode : {BoundaryMode::Periodization, BoundaryMode::Symmetric}) {
            for (std::size_t n : {5u, 7u, 9u, 33u}) {
                const auto x = random_signal(rng, n);
                const auto c = dwt1d(x, fb, mode);
                EXPECT_LT(max_abs_diff(idwt1d(c.approx, c.detail, fb, mode, n), x), 1e-9);
            }
        }
    }
}

TEST(Dwt2d, HandExample) {
    Plane p(2, 2);
    p.data = {1, 2, 3, 4};
    const auto q = dwt2d(p, filter_bank("haar"), BoundaryMode::Periodization);
    ASSERT_EQ(q.ll.rows, 1u);
    EXPECT_NEAR(q.ll(0, 0), 5.0, 1e-12);
    EXPECT_NEAR(q.lh(0, 0), -2.0, 1e-12);
    EXPECT_NEAR(q.hl(0, 0), -1.0, 1e-12);
    EXPECT_NEAR(q.hh(0, 0), 0.0, 1e-12);
    const auto back = idwt2d(q, filter_bank("haar"), BoundaryMode::Periodization);
    EXPECT_LT(max_abs_diff(back.data, p.data), 1e-9);
}

TEST(Dwt2d, ConstantPlane) {
    const Plane p(8, 6, 0.25);
    const auto q = dwt2d(p, filter_bank("haar"), BoundaryMode::Periodization);
    for (double v : q.ll.data) EXPECT_NEAR(v, 0.5, 1e-12);
    for (const Plane* b : {&q.lh, &q.hl, &q.hh})
        for (double v : b->data) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Dwt2d, ZeroQuadInvertsToZero) {
    SubbandQuad q{Plane(4, 4), Plane(4, 4), Plane(4, 4), Plane(4, 4), 8, 8};
    for (double v : idwt2d(q, filter_bank("db2"), BoundaryMode::Periodization).data) EXPECT_EQ(v, 0.0);
}

TEST(Dwt2d, ParsevalPeriodization) {
    Rng rng(21);
    for (const char* name : {"haar", "db2"}) {
        const auto p = random_plane(rng, 32, 32);
        const auto q = dwt2d(p, filter_bank(name), BoundaryMode::Periodization);
        const double in = energy(p);
        const double out = energy(q.ll) + energy(q.lh) + energy(q.hl) + energy(q.hh);
        EXPECT_LT(std::abs(in - out) / in, 1e-9) << name;
    }
}

TEST(Dwt2d, ShapeContract) {
    Rng rng(2);
    const auto fb = filter_bank("db2");
    for (auto [r, c] : std::vector<std::pair<std::size_t, std::size_t>>{{8, 8}, {10, 6}, {9, 7}, {64, 32}}) {
        const auto q = dwt2d(random_plane(rng, r, c), fb, BoundaryMode::Periodization);
        EXPECT_EQ(q.hh.rows, (r + 1) / 2);
        EXPECT_EQ(q.hh.cols, (c + 1) / 2);
        const auto s = dwt2d(random_plane(rng, r, c), fb, BoundaryMode::Symmetric);
        EXPECT_EQ(s.hh.rows, (r + 3) / 2);
        EXPECT_EQ(s.hh.cols, (c + 3) / 2);
    }
}

TEST(Dwt2d, SeparableMatchesDwt1dOnRowsThenColumns) {
    Rng rng(8);
    const auto fb = filter_bank("db2");
    const auto p = random_plane(rng, 12, 10);
    for (auto mode : {BoundaryMode::Periodization, BoundaryMode::Symmetric}) {
        const auto q = dwt2d(p, fb, mode);
        std::vector<std::vector<double>> lo_rows, hi_rows;
        for (std::size_t r = 0; r < p.rows; ++r) {
            auto d = dwt1d(p.row(r), fb, mode);
            lo_rows.push_back(d.approx);
            hi_rows.push_back(d.detail);
        }
        for (std::size_t c = 0; c < q.ll.cols; ++c) {
            std::vector<double> lcol, hcol;
            for (std::size_t r = 0; r < p.rows; ++r) {
                lcol.push_back(lo_rows[r][c]);
                hcol.push_back(hi_rows[r][c]);
            }
            const auto l = dwt1d(lcol, fb, mode);
            const auto h = dwt1d(hcol, fb, mode);
            for (std::size_t r = 0; r < q.ll.rows; ++r) {
                EXPECT_NEAR(q.ll(r, c), l.approx[r], 1e-14);
                EXPECT_NEAR(q.lh(r, c), l.detail[r], 1e-14);
                EXPECT_NEAR(q.hl(r, c), h.approx[r], 1e-14);
                EXPECT_NEAR(q.hh(r, c), h.detail[r], 1e-14);
            }
        }
    }
}

TEST(Dwt2d, Linearity) {
    Rng rng(4);
    const auto fb = filter_bank("db2");
    const auto a = random_plane(rng, 16, 16);
    const auto b = random_plane(rng, 16, 16);
    const double alpha = 1.7, beta = -0.3;
    Plane mix(16, 16);
    for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = alpha * a.data[i] + beta * b.data[i];
    for (auto mode : {BoundaryMode::Periodization, BoundaryMode::Symmetric}) {
        const auto qa = dwt2d(a, fb, mode), qb = dwt2d(b, fb, mode), qm = dwt2d(mix, fb, mode);
        const Plane* A[4] = {&qa.ll, &qa.lh, &qa.hl, &qa.hh};
        const Plane* B[4] = {&qb.ll, &qb.lh, &qb.hl, &qb.hh};
        const Plane* M[4] = {&qm.ll, &qm.lh, &qm.hl, &qm.hh};
        for (int k = 0; k < 4; ++k)
            for (std::size_t i = 0; i < M[k]->data.size(); ++i)
                EXPECT_NEAR(M[k]->data[i], alpha * A[k]->data[i] + beta * B[k]->data[i], 1e-10);
    }
}

TEST(Dwt2d, RoundTripProperty) {
    Rng rng(99);
    for (const char* name : {"haar", "db2"}) {
        const auto fb = filter_bank(name);
        for (auto mode : {BoundaryMode::Periodization, BoundaryMode::Symmetric}) {
            double worst = 0.0;
            for (int trial = 0; trial < 100; ++trial) {
                const auto p = random_plane(rng, 64, 64);
                worst = std::max(worst, max_abs_diff(idwt2d(dwt2d(p, fb, mode), fb, mode).data, p.data));
            }
            EXPECT_LT(worst, 1e-9) << name << " " << to_string(mode);
        }
    }
}

TEST(Dwt2d, OddShapesRoundTrip) {
    Rng rng(12);
    for (const char* name : {"haar", "db2"}) {
        const auto fb = filter_bank(name);
        for (auto mode : {BoundaryMode::Periodization, BoundaryMode::Symmetric}) {
            const auto p = random_plane(rng, 13, 9);
            const auto back = idwt2d(dwt2d(p, fb, mode), fb, mode);
            ASSERT_TRUE(back.same_shape(p));
            EXPECT_LT(max_abs_diff(back.data, p.data), 1e-9);
        }
    }
}

TEST(Dwt2d, SerialAndParallelAreBitIdentical) {
    Rng rng(1);
    const auto p = random_plane(rng, 48, 40);
    for (const char* name : {"haar", "db2"}) {
        const auto fb = filter_bank(name);
        for (auto mode : {BoundaryMode::Periodization, BoundaryMode::Symmetric}) {
            const auto s = dwt2d(p, fb, mode, Exec::Serial);
            const auto q = dwt2d(p, fb, mode, Exec::Parallel);
            EXPECT_EQ(s.ll, q.ll);
            EXPECT_EQ(s.lh, q.lh);
            EXPECT_EQ(s.hl, q.hl);
            EXPECT_EQ(s.hh, q.hh);
            EXPECT_EQ(idwt2d(s, fb, mode, Exec::Serial), idwt2d(q, fb, mode, Exec::Parallel));
        }
    }
}

TEST(Dwt2d, DegenerateAndMismatchedShapes) {
    EXPECT_THROW(dwt2d(Plane(1, 8), filter_bank("haar"), BoundaryMode::Periodization), InvalidArgument);
    SubbandQuad q{Plane(2, 2), Plane(2, 2), Plane(2, 3), Plane(2, 2), 4, 4};
    EXPECT_THROW(idwt2d(q, filter_bank("haar"), BoundaryMode::Periodization), InvalidArgument);
}

TEST(Wavedec2, SingleLevelEqualsDwt2d) {
    Rng rng(6);
    const auto p = random_plane(rng, 16, 16);
    const auto fb = filter_bank("db2");
    const auto pyr = wavedec2(p, fb, 1, BoundaryMode::Periodization);
    const auto q = dwt2d(p, fb, BoundaryMode::Periodization);
    ASSERT_EQ(pyr.levels.size(), 1u);
    EXPECT_EQ(pyr.ll_final, q.ll);
    EXPECT_EQ(pyr.levels[0].lh, q.lh);
    EXPECT_EQ(pyr.levels[0].hl, q.hl);
    EXPECT_EQ(pyr.levels[0].hh, q.hh);
}

TEST(Wavedec2, ConstantTwoLevels) {
    const double c = 0.3;
    const auto pyr = wavedec2(Plane(8, 8, c), filter_bank("haar"), 2, BoundaryMode::Periodization);
    ASSERT_EQ(pyr.levels.size(), 2u);
    EXPECT_EQ(pyr.levels[1].hh.rows, 2u);
    for (double v : pyr.ll_final.data) EXPECT_NEAR(v, 4 * c, 1e-12);
    for (const auto& lvl : pyr.levels)
        for (const Plane* b : {&lvl.lh, &lvl.hl, &lvl.hh})
            for (double v : b->data) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Wavedec2, ThreeLevelRoundTrip) {
    Rng rng(7);
    const auto p = random_plane(rng, 64, 64);
    const auto fb = filter_bank("db2");
    for (auto mode : {BoundaryMode::Periodization, BoundaryMode::Symmetric}) {
        const auto pyr = wavedec2(p, fb, 3, mode);
        EXPECT_LT(max_abs_diff(waverec2(pyr, fb, mode).data, p.data), 1e-8);
    }
}

TEST(Wavedec2, TooManyLevelsReportsMaximum) {
    const auto fb = filter_bank("haar");
    EXPECT_EQ(max_levels(8, 8, fb, BoundaryMode::Periodization), 2);
    EXPECT_EQ(max_levels(64, 64, fb, BoundaryMode::Periodization), 5);
    try {
        wavedec2(Plane(8, 8), fb, 3, BoundaryMode::Periodization);
        FAIL() << "expected InvalidArgument";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("at most 2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(wavedec2(Plane(8, 8), fb, 0, BoundaryMode::Periodization), InvalidArgument);
}
