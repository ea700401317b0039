#include <algorithm>
#include <cmath>
#include <numeric>

#include "specswin/cascade.hpp"
#include "specswin/error.hpp"

namespace specswin {

namespace {

double mean_of(std::span<const double> a) {
    return std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
}

std::vector<int> rank_desc(const std::vector<int>& ids, const std::vector<double>& scores) {
    std::vector<std::size_t> idx(ids.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ids[a] < ids[b];
    });
    std::vector<int> out;
    for (std::size_t i : idx) out.push_back(ids[i]);
    return out;
}

std::vector<int> target_bands(const TileSet& data) {
    if (data.empty()) throw DataError("importance: dataset is empty");
    std::vector<int> ids = data.tiles.front().hsi.band_ids;
    std::sort(ids.begin(), ids.end());
    return ids;
}

ImportanceScores finish(std::vector<int> ids, std::vector<double> scores, std::string method) {
    ImportanceScores s;
    s.ranking = rank_desc(ids, scores);
    s.band_ids = std::move(ids);
    s.scores = std::move(scores);
    s.method = std::move(method);
    return s;
}

}  // namespace

std::vector<double> band_values(const TileSet& data, int band) {
    if (data.empty()) throw DataError("dataset is empty");
    std::vector<double> out;
    for (const auto& t : data.tiles) {
        const SpectralCube* cube = &t.hsi;
        int ch = cube->channel_of(band);
        if (ch < 0) {
            cube = &t.msi;
            ch = cube->channel_of(band);
        }
        if (ch < 0) throw DataError("band " + std::to_string(band) + " is not present in the dataset");
        for (float v : cube->band(ch)) out.push_back(v);
    }
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("pearson: length mismatch");
    if (a.size() < 2) return 0.0;
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double mutual_information(std::span<const double> a, std::span<const double> b, int bins) {
    if (a.size() != b.size()) throw ShapeError("mutual information: length mismatch");
    if (bins < 2) throw RangeError("mutual information needs at least 2 bins");
    if (a.empty()) return 0.0;
    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
    if (!(*amax > *amin) || !(*bmax > *bmin)) return 0.0;
    auto bin_of = [bins](double v, double lo, double hi) {
        const int k = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        return std::clamp(k, 0, bins - 1);
    };
    const std::size_t nb = static_cast<std::size_t>(bins);
    std::vector<double> joint(nb * nb, 0.0), pa(nb, 0.0), pb(nb, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int x = bin_of(a[i], *amin, *amax), y = bin_of(b[i], *bmin, *bmax);
        joint[static_cast<std::size_t>(x) * nb + static_cast<std::size_t>(y)] += 1.0;
        pa[static_cast<std::size_t>(x)] += 1.0;
        pb[static_cast<std::size_t>(y)] += 1.0;
    }
    const double n = static_cast<double>(a.size());
    double mi = 0.0;
    for (std::size_t x = 0; x < nb; ++x) {
        for (std::size_t y = 0; y < nb; ++y) {
            const double c = joint[x * nb + y];
            if (c == 0.0) continue;
            mi += (c / n) * std::log(c * n / (pa[x] * pb[y]));
        }
    }
    return std::max(0.0, mi);
}

ImportanceScores variance_importance(const TileSet& data) {
    const std::vector<int> ids = target_bands(data);
    std::vector<double> scores;
    for (int b : ids) {
        const auto v = band_values(data, b);
        if (v.size() < 2) throw DataError("variance importance needs at least 2 samples");
        const double m = mean_of(v);
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        scores.push_back(s / static_cast<double>(v.size()));
    }
    return finish(ids, std::move(scores), "variance");
}

ImportanceScores correlation_importance(const TileSet& data, std::span<const int> input_bands) {
    if (input_bands.empty()) throw ConfigError("correlation importance needs input bands");
    const std::vector<int> ids = target_bands(data);
    std::vector<std::vector<double>> inputs;
    for (int s : input_bands) inputs.push_back(band_values(data, s));
    std::vector<double> scores;
    for (int b : ids) {
        const auto v = band_values(data, b);
        double best = 0.0;
        for (const auto& s : inputs) best = std::max(best, std::abs(pearson(v, s)));
        scores.push_back(best);
    }
    return finish(ids, std::move(scores), "correlation");
}

ImportanceScores mutual_info_importance(const TileSet& data, std::span<const int> input_bands, int bins) {
    if (input_bands.empty()) throw ConfigError("mutual information importance needs input bands");
    const std::vector<int> ids = target_bands(data);
    std::vector<std::vector<double>> inputs;
    for (int s : input_bands) inputs.push_back(band_values(data, s));
    std::vector<double> scores;
    for (int b : ids) {
        const auto v = band_values(data, b);
        double best = 0.0;
        for (const auto& s : inputs) best = std::max(best, mutual_information(v, s, bins));
        scores.push_back(best);
    }
    return finish(ids, std::move(scores), "mutual_info");
}

double band_similarity(const TileSet& data, int band_a, int band_b) {
    return std::abs(pearson(band_values(data, band_a), band_values(data, band_b)));
}

}  // namespace specswin
