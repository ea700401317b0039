#include "specswin/bandseq.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "specswin/error.hpp"

namespace specswin {

namespace {

BandPair make_pair_sorted(int a, int b) { return a < b ? BandPair{a, b} : BandPair{b, a}; }

std::vector<BandPair> all_pairs(const std::vector<int>& bands) {
    std::vector<BandPair> out;
    for (std::size_t i = 0; i < bands.size(); ++i)
        for (std::size_t j = i + 1; j < bands.size(); ++j) out.emplace_back(bands[i], bands[j]);
    return out;
}

}  // namespace

BandSequence BandSequence::from_order(std::vector<int> order) {
    BandSequence s;
    s.order = std::move(order);
    std::set<int> distinct(s.order.begin(), s.order.end());
    s.bands.assign(distinct.begin(), distinct.end());
    std::set<BandPair> cov;
    for (std::size_t k = 0; k + 1 < s.order.size(); ++k) {
        if (s.order[k] != s.order[k + 1]) cov.insert(make_pair_sorted(s.order[k], s.order[k + 1]));
    }
    s.coverage.assign(cov.begin(), cov.end());
    return s;
}

bool BandSequence::is_complete() const noexcept {
    const std::size_t n = bands.size();
    return n >= 2 && coverage.size() == n * (n - 1) / 2;
}

CoverageReport validate_coverage(const BandSequence& seq, int max_distance) {
    if (seq.order.empty()) throw DataError("validate_coverage: empty sequence");
    if (max_distance < 1) throw RangeError("validate_coverage: max_distance must be >= 1");
    std::set<int> distinct(seq.order.begin(), seq.order.end());
    const std::vector<int> bands(distinct.begin(), distinct.end());
    std::set<BandPair> hit;
    const std::size_t n = seq.order.size();
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t d = 1; d <= static_cast<std::size_t>(max_distance) && k + d < n; ++d) {
            if (seq.order[k] != seq.order[k + d]) hit.insert(make_pair_sorted(seq.order[k], seq.order[k + d]));
        }
    }
    CoverageReport r;
    for (const auto& p : all_pairs(bands)) (hit.count(p) ? r.satisfied : r.missing).push_back(p);
    r.complete = bands.size() >= 2 && r.missing.empty();
    return r;
}

BandSequence paper_sequence() {
    return BandSequence::from_order({30, 20, 9, 40, 52, 20, 40, 30, 9, 52, 30, 20, 9, 40, 52, 30});
}

int min_sequence_length(int n) {
    if (n < 2) throw RangeError("min_sequence_length: need at least 2 bands");
    const int edges = n * (n - 1) / 2;
    if (n % 2 == 1) return edges + 1;
    // Every vertex has odd degree n-1: n/2 - 1 extra edges pair up all but the
    // two trail endpoints, and the walk has one more vertex than edges.
    return edges + (n / 2 - 1) + 1;
}

BandSequence build_sequence(std::span<const int> bands_in, int target_depth) {
    std::vector<int> v(bands_in.begin(), bands_in.end());
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end()) throw RangeError("build_sequence: duplicate band");
    const int n = static_cast<int>(v.size());
    if (n < 2) throw RangeError("build_sequence: need at least 2 bands");
    const int minimum = min_sequence_length(n);
    if (target_depth < minimum) {
        throw RangeError("build_sequence: depth " + std::to_string(target_depth) + " is below the minimum " +
                         std::to_string(minimum) + " for " + std::to_string(n) + " bands");
    }

    // Multigraph on positions 0..n-1: complete graph plus, for even n, a
    // matching on vertices 2..n-1 so that only 0 and 1 keep odd degree.
    std::vector<std::vector<int>> mult(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), 0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) mult[a][b] = a == b ? 0 : 1;
    if (n % 2 == 0) {
        for (int a = 2; a + 1 < n; a += 2) {
            ++mult[a][a + 1];
            ++mult[a + 1][a];
        }
    }

    // Hierholzer, always leaving a vertex through its smallest remaining neighbour.
    std::vector<int> stack{0}, walk;
    while (!stack.empty()) {
        const int u = stack.back();
        int next = -1;
        for (int w = 0; w < n; ++w) {
            if (mult[u][w] > 0) {
                next = w;
                break;
            }
        }
        if (next < 0) {
            walk.push_back(u);
            stack.pop_back();
        } else {
            --mult[u][next];
            --mult[next][u];
            stack.push_back(next);
        }
    }
    std::reverse(walk.begin(), walk.end());

    std::vector<int> order;
    std::vector<int> used(static_cast<std::size_t>(n), 0);
    for (int idx : walk) {
        order.push_back(v[idx]);
        ++used[idx];
    }
    while (static_cast<int>(order.size()) < target_depth) {
        int pick = -1;
        for (int i = 0; i < n; ++i) {
            if (v[i] == order.back()) continue;
            if (pick < 0 || used[i] < used[pick]) pick = i;
        }
        order.push_back(v[pick]);
        ++used[pick];
    }
    return BandSequence::from_order(std::move(order));
}

std::vector<int> parse_band_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        item = item.substr(b, e - b + 1);
        std::size_t used = 0;
        int value = 0;
        try {
            value = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || item.empty()) throw ConfigError("invalid band index '" + item + "'");
        out.push_back(value);
    }
    if (out.empty()) throw ConfigError("empty band list");
    return out;
}

std::string format_band_list(std::span<const int> bands) {
    std::string s;
    for (std::size_t i = 0; i < bands.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(bands[i]);
    }
    return s;
}

void VolumeSpec::validate() const {
    if (height <= 0 || width <= 0) throw ShapeError("volume spatial dims must be positive");
    if (depth <= 0 || depth % 32 != 0) throw ShapeError("volume depth must be a positive multiple of 32");
    if (channels != 1) throw ShapeError("volume channels per slice must be 1");
}

Tensor assemble_volume(const SpectralCube& tile, const BandSequence& seq, const VolumeSpec& spec) {
    spec.validate();
    if (seq.order.empty()) throw DataError("assemble_volume: empty sequence");
    if (!validate_coverage(seq).complete) throw DataError("assemble_volume: sequence does not cover every band pair");
    if (tile.height != spec.height || tile.width != spec.width) {
        throw ShapeError("assemble_volume: tile is " + std::to_string(tile.height) + "x" + std::to_string(tile.width) +
                         " but the volume expects " + std::to_string(spec.height) + "x" + std::to_string(spec.width));
    }
    std::vector<int> channel(seq.order.size());
    for (std::size_t k = 0; k < seq.order.size(); ++k) {
        channel[k] = tile.channel_of(seq.order[k]);
        if (channel[k] < 0) throw DataError("assemble_volume: band " + std::to_string(seq.order[k]) + " missing from tile");
    }
    const std::int64_t H = spec.height, W = spec.width, D = spec.depth;
    Tensor vol({H, W, D, 1});
    double* out = vol.data();
    const std::size_t L = seq.order.size();
    for (std::int64_t y = 0; y < H; ++y) {
        for (std::int64_t x = 0; x < W; ++x) {
            double* px = out + (y * W + x) * D;
            for (std::int64_t k = 0; k < D; ++k) {
                px[k] = tile.at(static_cast<int>(y), static_cast<int>(x), channel[static_cast<std::size_t>(k) % L]);
            }
        }
    }
    return vol;
}

}  // namespace specswin
