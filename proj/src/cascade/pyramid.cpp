#include <algorithm>
#include <set>

#include "specswin/cascade.hpp"
#include "specswin/error.hpp"

namespace specswin {

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Physical: return "physical";
        case Strategy::MutualInfo: return "mutual_info";
        case Strategy::Variance: return "variance";
        case Strategy::SpectralPhysics: return "spectral_physics";
        case Strategy::Correlation: return "correlation";
        case Strategy::Uniform: return "uniform";
    }
    return "unknown";
}

Strategy parse_strategy(const std::string& name) {
    for (Strategy s : all_strategies())
        if (name == strategy_name(s)) return s;
    throw ConfigError("unknown cascade strategy '" + name +
                      "' (expected physical, mutual_info, variance, spectral_physics, correlation or uniform)");
}

std::vector<Strategy> all_strategies() {
    return {Strategy::Physical, Strategy::MutualInfo, Strategy::Variance,
            Strategy::SpectralPhysics, Strategy::Correlation, Strategy::Uniform};
}

std::vector<int> CascadePyramid::cascade_bands() const {
    std::vector<int> out;
    for (const auto& l : levels) out.insert(out.end(), l.begin(), l.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> CascadePyramid::cumulative(int k) const {
    if (k < 0 || k >= static_cast<int>(levels.size())) throw RangeError("pyramid has no level " + std::to_string(k));
    std::vector<int> out;
    for (int i = 0; i <= k; ++i) out.insert(out.end(), levels[i].begin(), levels[i].end());
    return out;
}

void CascadePyramid::validate() const {
    if (levels.empty()) throw ConfigError("pyramid has no levels");
    std::set<int> seen;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k].empty()) throw ConfigError("pyramid level " + std::to_string(k) + " is empty");
        for (int b : levels[k]) {
            if (b < 0 || b >= total_bands) throw RangeError("pyramid band " + std::to_string(b) + " out of range");
            if (!seen.insert(b).second) throw ConfigError("band " + std::to_string(b) + " appears in two levels");
        }
    }
    for (int b : finetune_bands) {
        if (b < 0 || b >= total_bands) throw RangeError("fine-tune band " + std::to_string(b) + " out of range");
        if (!seen.insert(b).second) throw ConfigError("fine-tune band " + std::to_string(b) + " is also a cascade band");
    }
}

namespace {

std::vector<int> complement(const std::vector<std::vector<int>>& levels, int total) {
    std::vector<bool> used(static_cast<std::size_t>(total), false);
    for (const auto& l : levels)
        for (int b : l) used[static_cast<std::size_t>(b)] = true;
    std::vector<int> out;
    for (int b = 0; b < total; ++b)
        if (!used[static_cast<std::size_t>(b)]) out.push_back(b);
    return out;
}

}  // namespace

CascadePyramid pyramid_from_table(Strategy strategy) {
    CascadePyramid p;
    p.strategy = strategy;
    p.total_bands = 224;
    switch (strategy) {
        case Strategy::Physical:
            p.levels = {{0, 1, 2, 3, 4, 5, 6, 7, 8},
                        {15, 25, 27},
                        {48, 50, 54, 67, 81, 83, 90},
                        {108, 125, 135},
                        {155, 162, 175, 185, 189, 210, 218}};
            break;
        case Strategy::MutualInfo:
            p.levels = {{9, 18, 26, 27, 28, 29, 30, 31, 32},
                        {16, 19, 25},
                        {8, 10, 14, 15, 17, 20, 24},
                        {11, 12, 13},
                        {7, 21, 22, 23, 33, 47, 48}};
            break;
        case Strategy::Variance:
            p.levels = {{115, 165, 166, 167, 168, 169, 170, 171, 172},
                        {114, 116, 173},
                        {111, 112, 113, 117, 118, 119, 174},
                        {164, 175, 176},
                        {120, 177, 178, 207, 208, 209, 211}};
            break;
        case Strategy::SpectralPhysics:
            p.levels = {{70, 71, 72, 80, 81, 82, 83, 84, 103},
                        {73, 74, 75},
                        {76, 77, 78, 79, 85, 86, 87},
                        {88, 89, 90},
                        {91, 92, 93, 95, 96, 97, 98}};
            break;
        case Strategy::Correlation:
            p.levels = {{16, 19, 20, 21, 22, 23, 24, 25, 35},
                        {15, 17, 18},
                        {12, 13, 14, 26, 27, 28, 29},
                        {11, 30, 31},
                        {8, 9, 10, 32, 33, 34, 36}};
            break;
        case Strategy::Uniform:
            p.levels = {{0, 7, 15, 23, 31, 38, 46, 54, 62},
                        {70, 77, 85},
                        {93, 101, 109, 116, 124, 132, 140},
                        {147, 155, 163},
                        {171, 179, 186, 194, 202, 210, 218}};
            break;
    }
    p.finetune_bands = complement(p.levels, p.total_bands);
    return p;
}

CascadePyramid pyramid_from_ranking(std::span<const int> ranking, Strategy strategy, int total_bands,
                                    std::span<const int> level_sizes) {
    std::size_t need = 0;
    for (int s : level_sizes) {
        if (s < 1) throw ConfigError("pyramid level sizes must be positive");
        need += static_cast<std::size_t>(s);
    }
    if (ranking.size() < need) {
        throw ConfigError("ranking has " + std::to_string(ranking.size()) + " bands but the pyramid needs " +
                          std::to_string(need));
    }
    CascadePyramid p;
    p.strategy = strategy;
    p.total_bands = total_bands;
    std::size_t pos = 0;
    for (int s : level_sizes) {
        std::vector<int> level(ranking.begin() + static_cast<std::ptrdiff_t>(pos),
                               ranking.begin() + static_cast<std::ptrdiff_t>(pos + static_cast<std::size_t>(s)));
        std::sort(level.begin(), level.end());
        p.levels.push_back(std::move(level));
        pos += static_cast<std::size_t>(s);
    }
    p.finetune_bands = complement(p.levels, total_bands);
    p.validate();
    return p;
}

}  // namespace specswin
