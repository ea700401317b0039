#include <algorithm>
#include <cmath>

#include "specswin/datapipe.hpp"
#include "specswin/error.hpp"

namespace specswin {

SpectralCube select_simulated_msi(const SpectralCube& hsi, std::span<const int> band_indices) {
    if (band_indices.empty()) throw RangeError("band selection is empty");
    for (std::size_t i = 0; i < band_indices.size(); ++i) {
        const int b = band_indices[i];
        if (b < 0 || b >= hsi.bands) {
            throw RangeError("band index " + std::to_string(b) + " out of range for a " + std::to_string(hsi.bands) +
                             "-band cube");
        }
        if (i > 0 && b <= band_indices[i - 1]) throw RangeError("band indices must be sorted and unique");
    }
    std::vector<double> wl;
    for (int b : band_indices) wl.push_back(hsi.wavelengths[b]);
    SpectralCube out(hsi.height, hsi.width, wl, hsi.gsd);
    out.nodata = hsi.nodata;
    for (std::size_t i = 0; i < band_indices.size(); ++i) {
        const int b = band_indices[i];
        out.band_ids[i] = hsi.band_ids[b];
        std::ranges::copy(hsi.band(b), out.band(static_cast<int>(i)).begin());
    }
    return out;
}

SpectralCube downsample(const SpectralCube& cube, int factor) {
    if (factor < 2) throw RangeError("downsample factor must be >= 2");
    if (cube.height % factor != 0 || cube.width % factor != 0) {
        throw ShapeError("downsample: " + std::to_string(cube.height) + "x" + std::to_string(cube.width) +
                         " is not divisible by " + std::to_string(factor) + "; crop first");
    }
    const int oh = cube.height / factor, ow = cube.width / factor;
    SpectralCube out(oh, ow, cube.wavelengths, cube.gsd * factor);
    out.band_ids = cube.band_ids;
    out.nodata = cube.nodata;

    // Output pixel o covers input [o*f, (o+1)*f); its centre maps to (o + 0.5) * f - 0.5.
    struct Tap {
        int i0, i1;
        double w1;
    };
    auto taps = [&](int n_out, int n_in) {
        std::vector<Tap> t(static_cast<std::size_t>(n_out));
        for (int o = 0; o < n_out; ++o) {
            const double s = std::clamp((o + 0.5) * factor - 0.5, 0.0, static_cast<double>(n_in - 1));
            const int i0 = static_cast<int>(std::floor(s));
            const int i1 = std::min(i0 + 1, n_in - 1);
            t[o] = {i0, i1, s - i0};
        }
        return t;
    };
    const auto ty = taps(oh, cube.height);
    const auto tx = taps(ow, cube.width);
    for (int b = 0; b < cube.bands; ++b) {
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                const auto [y0, y1, wy] = ty[y];
                const auto [x0, x1, wx] = tx[x];
                const float v00 = cube.at(y0, x0, b), v01 = cube.at(y0, x1, b);
                const float v10 = cube.at(y1, x0, b), v11 = cube.at(y1, x1, b);
                if (cube.nodata && (cube.is_nodata(v00) || cube.is_nodata(v01) || cube.is_nodata(v10) ||
                                    cube.is_nodata(v11))) {
                    out.at(y, x, b) = *cube.nodata;
                    continue;
                }
                const double top = (1.0 - wx) * v00 + wx * v01;
                const double bot = (1.0 - wx) * v10 + wx * v11;
                out.at(y, x, b) = static_cast<float>((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return out;
}

SpectralCube spectral_linear_interpolation(const SpectralCube& msi, std::span<const double> target_wavelengths) {
    msi.validate();
    const auto& wl = msi.wavelengths;
    SpectralCube out(msi.height, msi.width, std::vector<double>(target_wavelengths.begin(), target_wavelengths.end()),
                     msi.gsd);
    for (std::size_t t = 0; t < target_wavelengths.size(); ++t) {
        const double x = target_wavelengths[t];
        int lo = 0, hi = 0;
        double w = 0.0;
        if (x <= wl.front()) {
            lo = hi = 0;
        } else if (x >= wl.back()) {
            lo = hi = msi.bands - 1;
        } else {
            hi = static_cast<int>(std::upper_bound(wl.begin(), wl.end(), x) - wl.begin());
            lo = hi - 1;
            w = (x - wl[lo]) / (wl[hi] - wl[lo]);
        }
        auto a = msi.band(lo);
        auto b = msi.band(hi);
        auto dst = out.band(static_cast<int>(t));
        for (std::size_t p = 0; p < msi.pixels(); ++p) dst[p] = static_cast<float>((1.0 - w) * a[p] + w * b[p]);
    }
    return out;
}

std::vector<double> nominal_wavelengths_224() {
    static const std::pair<int, double> anchors[] = {{0, 400.0},   {2, 410.0},   {9, 459.0},    {20, 553.0},
                                                     {30, 672.0},  {40, 846.0},  {48, 870.0},   {52, 1240.0},
                                                     {108, 1470.0}, {210, 2490.0}, {223, 2500.0}};
    std::vector<double> wl(224);
    for (std::size_t a = 0; a + 1 < std::size(anchors); ++a) {
        const auto [i0, w0] = anchors[a];
        const auto [i1, w1] = anchors[a + 1];
        for (int i = i0; i <= i1; ++i) wl[i] = w0 + (w1 - w0) * (i - i0) / static_cast<double>(i1 - i0);
    }
    return wl;
}

}  // namespace specswin
