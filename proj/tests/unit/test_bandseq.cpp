#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "../oracles.hpp"
#include "helpers.hpp"
#include "specswin/bandseq.hpp"
#include "specswin/error.hpp"

using namespace specswin;

TEST(PublishedSequence, ListingAndCoverage) {
    const BandSequence s = paper_sequence();
    EXPECT_EQ(s.order, (std::vector<int>{30, 20, 9, 40, 52, 20, 40, 30, 9, 52, 30, 20, 9, 40, 52, 30}));
    EXPECT_EQ(s.bands, (std::vector<int>{9, 20, 30, 40, 52}));
    const CoverageReport r = validate_coverage(s);
    EXPECT_TRUE(r.complete);
    EXPECT_EQ(r.satisfied.size(), 10u);
    EXPECT_TRUE(r.missing.empty());
}

TEST(Coverage, BlockSequenceOnlyCoversChainPairs) {
    const BandSequence s = BandSequence::from_order({30, 30, 30, 30, 20, 20, 20, 9, 9, 9, 40, 40, 40, 52, 52, 52});
    const CoverageReport r = validate_coverage(s);
    EXPECT_FALSE(r.complete);
    EXPECT_EQ(r.satisfied, (std::vector<BandPair>{{9, 20}, {9, 40}, {20, 30}, {40, 52}}));
    EXPECT_EQ(r.missing.size(), 6u);
}

TEST(Coverage, TwoBandCase) {
    const CoverageReport r = validate_coverage(BandSequence::from_order({3, 8}));
    EXPECT_TRUE(r.complete);
    EXPECT_EQ(r.satisfied.size(), 1u);
}

TEST(Coverage, WiderDistanceOptionCountsNearbyPairs) {
    const BandSequence s = BandSequence::from_order({1, 1, 2, 2, 3});
    EXPECT_FALSE(validate_coverage(s, 1).complete);
    EXPECT_TRUE(validate_coverage(s, 3).complete);
}

TEST(MinLength, MatchesBruteForceForTwoToFive) {
    for (int n = 2; n <= 5; ++n) EXPECT_EQ(min_sequence_length(n), oracle::brute_force_min_walk(n)) << "n=" << n;
    EXPECT_EQ(min_sequence_length(5), 11);
    EXPECT_EQ(min_sequence_length(2), 2);
    EXPECT_THROW(min_sequence_length(1), RangeError);
}

TEST(Build, CompleteForAllSmallBandSetsAndDepths) {
    for (int n = 2; n <= 5; ++n) {
        std::vector<int> bands;
        for (int i = 0; i < n; ++i) bands.push_back(3 * i + 1);
        for (int d = min_sequence_length(n); d <= 40; ++d) {
            const BandSequence s = build_sequence(bands, d);
            EXPECT_EQ(static_cast<int>(s.depth()), d);
            EXPECT_TRUE(validate_coverage(s).complete) << "n=" << n << " d=" << d;
            for (int b : s.order) EXPECT_TRUE(std::find(bands.begin(), bands.end(), b) != bands.end());
        }
    }
}

TEST(Build, TriangleWalkAtMinimumDepth) {
    const BandSequence s = build_sequence(std::vector<int>{4, 7, 9}, 4);
    EXPECT_EQ(s.order, (std::vector<int>{4, 7, 9, 4}));
}

TEST(Build, FiveBandsAtDepthSixteen) {
    const BandSequence s = build_sequence(std::vector<int>{9, 20, 30, 40, 52}, 16);
    EXPECT_EQ(s.depth(), 16u);
    EXPECT_TRUE(s.is_complete());
}

TEST(Build, BelowMinimumIsRejected) {
    EXPECT_THROW(build_sequence(std::vector<int>{9, 20, 30, 40, 52}, 10), RangeError);
}

TEST(Build, IsDeterministic) {
    const std::vector<int> b{2, 5, 11, 17};
    EXPECT_EQ(build_sequence(b, 13).order, build_sequence(b, 13).order);
}

TEST(BandList, ParseAndFormat) {
    EXPECT_EQ(parse_band_list("9,20, 30,40,52"), (std::vector<int>{9, 20, 30, 40, 52}));
    EXPECT_EQ(format_band_list(std::vector<int>{1, 2}), "1,2");
    EXPECT_THROW(parse_band_list("9,x"), ConfigError);
}

TEST(Volume, PublishedSequenceSelfConcatenates) {
    SpectralCube tile(8, 8, {459, 553, 672, 846, 1240}, 14.0);
    tile.band_ids = {9, 20, 30, 40, 52};
    for (int b = 0; b < 5; ++b)
        for (std::size_t p = 0; p < tile.pixels(); ++p) tile.band(b)[p] = static_cast<float>(b * 100 + p);
    const BandSequence seq = paper_sequence();
    const Tensor v = assemble_volume(tile, seq, VolumeSpec{8, 8, 32, 1});
    ASSERT_EQ(v.shape(), (Shape{8, 8, 32, 1}));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            for (int k = 0; k < 32; ++k) {
                const int ch = tile.channel_of(seq.order[k % 16]);
                EXPECT_EQ(v.at({y, x, k, 0}), tile.at(y, x, ch));
                EXPECT_EQ(v.at({y, x, k, 0}), v.at({y, x, (k + 16) % 32, 0}));
            }
}

TEST(Volume, ConstantTileGivesConstantVolume) {
    SpectralCube tile(4, 4, {459, 553, 672, 846, 1240}, 14.0);
    tile.band_ids = {9, 20, 30, 40, 52};
    std::fill(tile.data.begin(), tile.data.end(), 0.25f);
    const Tensor v = assemble_volume(tile, paper_sequence(), VolumeSpec{4, 4, 32, 1});
    for (double x : v.vec()) EXPECT_EQ(x, 0.25);
}

TEST(Volume, ChangingOneBandChangesOnlyItsSlices) {
    SpectralCube tile = specswin::testing::random_cube(4, 4, 5, 9);
    tile.band_ids = {9, 20, 30, 40, 52};
    const BandSequence seq = paper_sequence();
    const VolumeSpec spec{4, 4, 32, 1};
    const Tensor a = assemble_volume(tile, seq, spec);
    for (float& v : tile.band(2)) v += 1.0f;
    const Tensor b = assemble_volume(tile, seq, spec);
    for (int k = 0; k < 32; ++k) {
        const bool changed = a.at({1, 1, k, 0}) != b.at({1, 1, k, 0});
        EXPECT_EQ(changed, seq.order[k % 16] == 30) << "slice " << k;
    }
}

TEST(Volume, MissingBandAndBadSpecAreRejected) {
    SpectralCube tile = specswin::testing::random_cube(4, 4, 4, 1);
    tile.band_ids = {9, 20, 30, 40};
    EXPECT_THROW(assemble_volume(tile, paper_sequence(), VolumeSpec{4, 4, 32, 1}), DataError);
    EXPECT_THROW((VolumeSpec{4, 4, 16, 1}.validate()), DataError);
}
