#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "helpers.hpp"
#include "specswin/error.hpp"
#include "specswin/metrics.hpp"

using namespace specswin;
using specswin::testing::random_cube;

namespace {

SpectralCube with_noise(const SpectralCube& c, double amp, std::uint64_t seed) {
    SpectralCube out = c;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& v : out.data) v = static_cast<float>(v + amp * n(rng));
    return out;
}

SpectralCube filled(int h, int w, std::vector<double> values_per_band) {
    std::vector<double> wl;
    for (std::size_t i = 0; i < values_per_band.size(); ++i) wl.push_back(500.0 + 100.0 * static_cast<double>(i));
    SpectralCube c(h, w, wl);
    for (int b = 0; b < c.bands; ++b)
        for (auto& v : c.band(b)) v = static_cast<float>(values_per_band[static_cast<std::size_t>(b)]);
    return c;
}

}  // namespace

TEST(Metrics, MatchLoopOraclesOnRandomCubes) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const SpectralCube f = random_cube(4, 4, 3, 2 * seed + 1);
        const SpectralCube g = random_cube(4, 4, 3, 2 * seed + 2);
        EXPECT_TRUE(oracle::rel_close(psnr(f, g), oracle::naive_psnr(f, g), 1e-10));
        EXPECT_TRUE(oracle::rel_close(ergas(f, g), oracle::naive_ergas(f, g), 1e-10));
        EXPECT_TRUE(oracle::rel_close(sam(f, g), oracle::naive_sam(f, g), 1e-10));
        EXPECT_TRUE(oracle::rel_close(q_index(f, g), oracle::naive_q(f, g), 1e-10));
        EXPECT_TRUE(oracle::rel_close(ssim(f, g), oracle::naive_q(f, g), 1e-10));
        EXPECT_TRUE(oracle::rel_close(rmse(f, g), oracle::naive_rmse(f, g), 1e-10));
    }
}

TEST(Psnr, PerfectAndAnalytic) {
    const SpectralCube f = random_cube(4, 4, 3, 1, 0.0, 0.9);
    EXPECT_EQ(psnr(f, f), kPerfectPsnr);
    SpectralCube ref = filled(2, 2, {0.5, 0.5});
    ref.at(0, 0, 0) = 1.0f;
    SpectralCube rec = ref;
    for (std::size_t i = 0; i < rec.data.size(); ++i) rec.data[i] += (i % 2 ? 0.125f : -0.125f);
    EXPECT_NEAR(psnr(ref, rec), 10.0 * std::log10(1.0 / (0.125 * 0.125)), 1e-9);
    EXPECT_THROW(psnr(ref, random_cube(2, 2, 3, 1)), ShapeError);
}

TEST(Psnr, DecreasesWithNoiseAmplitude) {
    const SpectralCube f = random_cube(16, 16, 4, 3);
    double prev = kPerfectPsnr;
    for (double amp : {0.001, 0.005, 0.02, 0.05, 0.1}) {
        const double p = psnr(f, with_noise(f, amp, 9));
        EXPECT_LT(p, prev) << amp;
        prev = p;
    }
}

TEST(Ergas, AnalyticSingleBand) {
    const SpectralCube ref = filled(2, 2, {2.0});
    SpectralCube rec = ref;
    for (std::size_t i = 0; i < rec.data.size(); ++i) rec.data[i] += (i % 2 ? 0.015625f : -0.015625f);
    EXPECT_NEAR(ergas(ref, rec), 100.0 * 0.015625 / 2.0, 1e-12);
    EXPECT_EQ(ergas(ref, ref), 0.0);
    EXPECT_NEAR(ergas(ref, rec, 0.5), 0.5 * ergas(ref, rec), 1e-12);
}

TEST(Ergas, ZeroMeanBandsAreExcluded) {
    SpectralCube ref = filled(2, 2, {0.0, 1.0});
    SpectralCube rec = filled(2, 2, {0.1, 1.1});
    const ErgasResult r = ergas_detail(ref, rec);
    EXPECT_EQ(r.excluded, 1);
    EXPECT_TRUE(std::isnan(r.contributions[0]));
    EXPECT_NEAR(r.value, 100.0 * 0.1, 1e-4);
    const SpectralCube zero = filled(2, 2, {0.0});
    EXPECT_THROW(ergas(zero, filled(2, 2, {1.0})), DataError);
}

TEST(Metrics, ErrorScalingIsLinear) {
    const SpectralCube f = filled(4, 4, {0.5, 0.6, 0.7});
    SpectralCube e1 = f, e2 = f;
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> sign(0, 1);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const float d = sign(rng) ? 0.0078125f : -0.0078125f;
        e1.data[i] += d;
        e2.data[i] += 2 * d;
    }
    EXPECT_NEAR(rmse(f, e2), 2.0 * rmse(f, e1), 1e-7);
    EXPECT_NEAR(ergas(f, e2), 2.0 * ergas(f, e1), 1e-5);
}

TEST(Sam, AnalyticCases) {
    const SpectralCube f = random_cube(4, 4, 3, 5);
    EXPECT_NEAR(sam(f, f), 0.0, 1e-5);
    SpectralCube a = filled(1, 1, {1.0, 0.0}), b = filled(1, 1, {0.0, 1.0});
    EXPECT_NEAR(sam(a, b), 90.0, 1e-12);
    SpectralCube s3 = f;
    for (auto& v : s3.data) v *= 3.0f;
    EXPECT_NEAR(sam(f, s3), 0.0, 1e-3);
}

TEST(Sam, PerPixelScalingInvariance) {
    const SpectralCube f = random_cube(4, 4, 3, 6), g = random_cube(4, 4, 3, 7);
    SpectralCube gs = g;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.25, 4.0);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            const double k = u(rng);
            for (int b = 0; b < 3; ++b) gs.at(y, x, b) = static_cast<float>(gs.at(y, x, b) * k);
        }
    EXPECT_NEAR(sam(f, gs), sam(f, g), 1e-4);
}

TEST(Sam, ZeroSpectraCountAsZeroDegrees) {
    SpectralCube f = filled(1, 2, {1.0, 0.0});
    SpectralCube g = filled(1, 2, {0.0, 1.0});
    f.at(0, 1, 0) = 0.0f;
    const SamResult r = sam_detail(f, g);
    EXPECT_EQ(r.zero_pixels, 1);
    EXPECT_NEAR(r.degrees, 45.0, 1e-12);
}

TEST(Quality, IdentityAndAntiCorrelation) {
    const SpectralCube f = random_cube(4, 4, 3, 10);
    EXPECT_NEAR(q_index(f, f), 1.0, 1e-9);
    EXPECT_NEAR(ssim(f, f), 1.0, 1e-9);
    EXPECT_LT(q_index(f, random_cube(4, 4, 3, 11)), 1.0 - 1e-9);
    SpectralCube ref(1, 2, {500.0});
    ref.data = {0.0f, 1.0f};
    SpectralCube rec = ref;
    rec.data = {1.0f, 0.0f};
    EXPECT_LT(q_index(ref, rec), 0.0);
}

TEST(Quality, ConstantShiftClosedForm) {
    const SpectralCube f = random_cube(8, 8, 1, 12);
    SpectralCube g = f;
    for (auto& v : g.data) v += 0.25f;
    double mu = 0.0, lo = 1e9, hi = -1e9;
    for (float v : f.data) {
        mu += v;
        lo = std::min(lo, static_cast<double>(v));
        hi = std::max(hi, static_cast<double>(v));
    }
    mu /= 64.0;
    const double c1 = std::pow(0.01 * (hi - lo), 2);
    double mg = 0.0;
    for (float v : g.data) mg += v;
    mg /= 64.0;
    const double expected = (2 * mu * mg + c1) / (mu * mu + mg * mg + c1);
    EXPECT_NEAR(ssim(f, g), expected, 1e-6);
    EXPECT_LT(ssim(f, g), 1.0);
}

TEST(Quality, WindowedSsimOfIdentityIsOne) {
    const SpectralCube f = random_cube(12, 12, 2, 13);
    EXPECT_NEAR(ssim_windowed(f, f, 7), 1.0, 1e-12);
    EXPECT_LT(ssim_windowed(f, with_noise(f, 0.1, 1), 7), 1.0);
}

TEST(Evaluate, IdentityReportAndComposition) {
    const SpectralCube f = random_cube(6, 6, 4, 14);
    const MetricReport id = evaluate(f, f);
    EXPECT_EQ(id.psnr, kPerfectPsnr);
    EXPECT_EQ(id.ergas, 0.0);
    EXPECT_NEAR(id.sam, 0.0, 1e-5);
    EXPECT_NEAR(id.q, 1.0, 1e-12);
    EXPECT_NEAR(id.ssim, 1.0, 1e-12);
    EXPECT_EQ(id.rmse, 0.0);

    const SpectralCube g = random_cube(6, 6, 4, 15);
    const MetricReport r = evaluate(f, g);
    EXPECT_EQ(r.bands, (std::vector<int>{0, 1, 2, 3}));
    EXPECT_DOUBLE_EQ(r.psnr, psnr(f, g));
    EXPECT_DOUBLE_EQ(r.ergas, ergas(f, g));
    EXPECT_DOUBLE_EQ(r.sam, sam(f, g));
    EXPECT_DOUBLE_EQ(r.q, q_index(f, g));
    EXPECT_DOUBLE_EQ(r.ssim, ssim(f, g));
    EXPECT_DOUBLE_EQ(r.rmse, rmse(f, g));
    EXPECT_EQ(r.band_psnr, psnr_per_band(f, g));
}

TEST(Evaluate, BestKSelectsExactBands) {
    const SpectralCube f = random_cube(5, 5, 14, 16);
    SpectralCube g = with_noise(f, 0.05, 2);
    const std::vector<int> exact{0, 2, 3, 5, 6, 7, 9, 10, 12, 13};
    for (int b : exact)
        for (std::size_t p = 0; p < f.pixels(); ++p) g.band(b)[p] = f.band(b)[p];
    const MetricReport r = evaluate(f, g, 10);
    EXPECT_EQ(r.bands, exact);
    EXPECT_EQ(r.psnr, kPerfectPsnr);
    EXPECT_EQ(evaluate(f, g, 40).bands.size(), 14u);
    EXPECT_THROW(evaluate(f, g, 0), RangeError);
}

// ---------------------------------------------------------------------------
// Spectral indices
// ---------------------------------------------------------------------------

namespace {

SpectralCube index_cube(float red, float nir, float swir) {
    SpectralCube c(2, 2, {560.0, 665.0, 840.0, 2200.0});
    for (auto& v : c.band(0)) v = 0.05f;
    for (auto& v : c.band(1)) v = red;
    for (auto& v : c.band(2)) v = nir;
    for (auto& v : c.band(3)) v = swir;
    return c;
}

}  // namespace

TEST(Indices, AnalyticValues) {
    const IndexMap ndvi = compute_index(index_cube(0.1f, 0.5f, 0.2f), IndexKind::NDVI);
    EXPECT_NEAR(ndvi.at(1, 1), 0.4 / 0.6, 1e-6);
    EXPECT_EQ(ndvi.wavelength_a, 840.0);
    EXPECT_EQ(ndvi.wavelength_b, 665.0);
    const IndexMap nbr = compute_index(index_cube(0.1f, 0.3f, 0.3f), IndexKind::NBR);
    EXPECT_EQ(nbr.at(0, 0), 0.0);
    const IndexMap zero = compute_index(index_cube(0.0f, 0.0f, 0.2f), IndexKind::NDVI);
    EXPECT_EQ(zero.at(0, 1), 0.0);
    EXPECT_EQ(zero.nodata[1], 1);
}

TEST(Indices, MissingWindowIsDataError) {
    SpectralCube c(2, 2, {450.0, 550.0});
    EXPECT_THROW(compute_index(c, IndexKind::NDVI), DataError);
    EXPECT_EQ(resolve_band(index_cube(0.1f, 0.2f, 0.3f), kNirWindow), 2);
}

TEST(Threshold, SimpleAndOracleCases) {
    const IndexMap pre = compute_index(index_cube(0.1f, 0.5f, 0.2f), IndexKind::NDVI);
    for (std::uint8_t m : threshold_change(pre, pre, 0.1)) EXPECT_EQ(m, 0);
    IndexMap post = pre;
    for (auto& v : post.values) v -= 0.3;
    for (std::uint8_t m : threshold_change(pre, post, 0.2)) EXPECT_EQ(m, 1);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    IndexMap a, b;
    a.height = b.height = 8;
    a.width = b.width = 8;
    a.values.resize(64);
    b.values.resize(64);
    a.nodata.assign(64, 0);
    b.nodata.assign(64, 0);
    for (int i = 0; i < 64; ++i) {
        a.values[i] = u(rng);
        b.values[i] = u(rng);
    }
    b.nodata[5] = 1;
    a.values[5] = 1.0;
    b.values[5] = -1.0;
    const auto mask = threshold_change(a, b, 0.25);
    for (int i = 0; i < 64; ++i) {
        const bool expect = i != 5 && a.values[i] - b.values[i] > 0.25;
        EXPECT_EQ(mask[i], expect ? 1 : 0) << i;
    }
    IndexMap other = b;
    other.kind = IndexKind::NBR;
    EXPECT_THROW(threshold_change(a, other, 0.1), DataError);
}
