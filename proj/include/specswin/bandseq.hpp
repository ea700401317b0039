#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specswin/cube.hpp"
#include "specswin/tensor.hpp"

namespace specswin {

using BandPair = std::pair<int, int>;  // always first < second

/// Ordered band indices along the model's depth axis.
struct BandSequence {
    std::vector<int> order;
    std::vector<int> bands;          // distinct values of `order`, ascending
    std::vector<BandPair> coverage;  // pairs adjacent somewhere in `order`, ascending

    static BandSequence from_order(std::vector<int> order);

    std::size_t depth() const noexcept { return order.size(); }
    bool is_complete() const noexcept;
};

struct CoverageReport {
    std::vector<BandPair> satisfied;
    std::vector<BandPair> missing;
    bool complete = false;
};

/// Checks which band pairs co-occur within `max_distance` depth positions
/// (1 means directly adjacent slices).
CoverageReport validate_coverage(const BandSequence& seq, int max_distance = 1);

/// The published depth-16 sequence over bands {9, 20, 30, 40, 52}.
BandSequence paper_sequence();

/// Shortest length of a sequence over n bands with every pair adjacent at least once.
int min_sequence_length(int n);

/// Edge-covering walk on the complete graph over `bands`, padded to
/// `target_depth` with the least-used band.
BandSequence build_sequence(std::span<const int> bands, int target_depth);

/// "9,20,30" -> {9, 20, 30}; malformed entries raise ConfigError.
std::vector<int> parse_band_list(const std::string& text);
std::string format_band_list(std::span<const int> bands);

struct VolumeSpec {
    int height = 128;
    int width = 128;
    int depth = 32;
    int channels = 1;

    void validate() const;
};

/// Stacks tile bands along depth following `seq`, repeating it to fill
/// spec.depth. Result shape: (H, W, D, S) with S = 1.
Tensor assemble_volume(const SpectralCube& msi_tile, const BandSequence& seq, const VolumeSpec& spec);

}  // namespace specswin
