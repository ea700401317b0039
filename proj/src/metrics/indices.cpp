#include <cmath>

#include "specswin/error.hpp"
#include "specswin/metrics.hpp"

namespace specswin {

const char* index_name(IndexKind k) { return k == IndexKind::NDVI ? "NDVI" : "NBR"; }

int resolve_band(const SpectralCube& cube, WavelengthWindow window) {
    const double centre = 0.5 * (window.lo + window.hi);
    int best = -1;
    for (int b = 0; b < cube.bands; ++b) {
        const double wl = cube.wavelengths[b];
        if (wl < window.lo || wl > window.hi) continue;
        if (best < 0 || std::abs(wl - centre) < std::abs(cube.wavelengths[best] - centre)) best = b;
    }
    if (best < 0) {
        throw DataError("no band between " + std::to_string(window.lo) + " and " + std::to_string(window.hi) + " nm");
    }
    return best;
}

IndexMap normalized_difference(const SpectralCube& cube, int channel_a, int channel_b, IndexKind kind) {
    if (channel_a < 0 || channel_a >= cube.bands || channel_b < 0 || channel_b >= cube.bands) {
        throw RangeError("index channel out of range");
    }
    IndexMap m;
    m.height = cube.height;
    m.width = cube.width;
    m.kind = kind;
    m.wavelength_a = cube.wavelengths[channel_a];
    m.wavelength_b = cube.wavelengths[channel_b];
    m.values.assign(cube.pixels(), 0.0);
    m.nodata.assign(cube.pixels(), 0);
    const auto a = cube.band(channel_a);
    const auto b = cube.band(channel_b);
    for (std::size_t i = 0; i < cube.pixels(); ++i) {
        const double sum = static_cast<double>(a[i]) + b[i];
        if (cube.is_nodata(a[i]) || cube.is_nodata(b[i]) || sum == 0.0) {
            m.nodata[i] = 1;
            continue;
        }
        m.values[i] = (static_cast<double>(a[i]) - b[i]) / sum;
    }
    return m;
}

IndexMap compute_index(const SpectralCube& cube, IndexKind kind) {
    const int nir = resolve_band(cube, kNirWindow);
    const int other = resolve_band(cube, kind == IndexKind::NDVI ? kRedWindow : kSwir2Window);
    return normalized_difference(cube, nir, other, kind);
}

std::vector<std::uint8_t> threshold_change(const IndexMap& pre, const IndexMap& post, double threshold) {
    if (pre.kind != post.kind) {
        throw DataError(std::string("cannot compare ") + index_name(pre.kind) + " with " + index_name(post.kind));
    }
    if (pre.height != post.height || pre.width != post.width) throw ShapeError("index maps differ in size");
    std::vector<std::uint8_t> mask(pre.values.size(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (pre.nodata[i] || post.nodata[i]) continue;
        mask[i] = pre.values[i] - post.values[i] > threshold ? 1 : 0;
    }
    return mask;
}

}  // namespace specswin
