#include <cmath>
#include <cstdlib>

#include "specswin/cascade.hpp"
#include "specswin/error.hpp"

namespace specswin {

std::vector<int> cascade_epoch_schedule(int base, double decay, int floor, int levels) {
    if (base <= 0) throw ConfigError("base epochs must be positive");
    if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("epoch decay must lie in (0, 1]");
    if (levels < 1) throw ConfigError("schedule needs at least one level");
    std::vector<int> out;
    for (int k = 0; k < levels; ++k) {
        // The decay factor is rounded to two decimals before scaling (0.9^4 -> 0.66).
        const double factor = std::round(std::pow(decay, k) * 100.0) / 100.0;
        out.push_back(std::max(floor, static_cast<int>(std::lround(base * factor))));
    }
    return out;
}

int finetune_epochs(double similarity, int band_distance) {
    if (!(similarity >= 0.0 && similarity <= 1.0)) throw RangeError("similarity must lie in [0, 1]");
    if (band_distance < 0) throw RangeError("band distance must be non-negative");
    const int base = similarity > 0.8 ? 30 : (similarity >= 0.6 ? 50 : 80);
    const double factor = band_distance < 5 ? 0.7 : (band_distance <= 50 ? 1.0 : 1.3);
    return static_cast<int>(std::lround(base * factor));
}

int nearest_cascade_band(const CascadePyramid& pyramid, int band) {
    int best = -1;
    for (int c : pyramid.cascade_bands()) {
        if (best < 0 || std::abs(c - band) < std::abs(best - band)) best = c;
    }
    if (best < 0) throw ConfigError("pyramid has no cascade bands");
    return best;
}

std::vector<FinetunePlan> plan_finetune(const CascadePyramid& pyramid, const TileSet& data, double finetune_scale) {
    if (!(finetune_scale > 0.0)) throw ConfigError("fine-tune scale must be positive");
    std::vector<FinetunePlan> out;
    for (int b : pyramid.finetune_bands) {
        FinetunePlan p;
        p.band = b;
        p.parent = nearest_cascade_band(pyramid, b);
        p.similarity = band_similarity(data, b, p.parent);
        p.distance = std::abs(b - p.parent);
        p.epochs = std::max(1, static_cast<int>(std::lround(finetune_epochs(p.similarity, p.distance) * finetune_scale)));
        out.push_back(p);
    }
    return out;
}

}  // namespace specswin
