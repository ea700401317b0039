#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "specswin/datapipe.hpp"
#include "specswin/error.hpp"

namespace specswin {

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
        default: return "unassigned";
    }
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    if (s == "unassigned") return Split::Unassigned;
    throw DataError("unknown split label '" + s + "'");
}

namespace {

SpectralCube crop(const SpectralCube& c, int y0, int x0, int h, int w) {
    SpectralCube out(h, w, c.wavelengths, c.gsd);
    out.band_ids = c.band_ids;
    out.nodata = c.nodata;
    for (int b = 0; b < c.bands; ++b)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.at(y, x, b) = c.at(y0 + y, x0 + x, b);
    return out;
}

// Mirror a continuous coordinate into [0, n-1] without repeating the edge sample.
double reflect(double u, int n) {
    if (n == 1) return 0.0;
    const double period = 2.0 * (n - 1);
    double t = std::fmod(std::abs(u), period);
    if (t > n - 1) t = period - t;
    return t;
}

float bilinear_reflect(const SpectralCube& c, int b, double y, double x) {
    y = reflect(y, c.height);
    x = reflect(x, c.width);
    const int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(x));
    const int y1 = std::min(y0 + 1, c.height - 1), x1 = std::min(x0 + 1, c.width - 1);
    const double wy = y - y0, wx = x - x0;
    const double top = (1.0 - wx) * c.at(y0, x0, b) + wx * c.at(y0, x1, b);
    const double bot = (1.0 - wx) * c.at(y1, x0, b) + wx * c.at(y1, x1, b);
    return static_cast<float>((1.0 - wy) * top + wy * bot);
}

struct AugmentDraw {
    double angle_rad = 0.0;
    int crop_h = 0, crop_w = 0, oy = 0, ox = 0;
    bool hflip = false, vflip = false;
};

SpectralCube apply_draw(const SpectralCube& src, const AugmentDraw& d) {
    const int H = src.height, W = src.width;
    SpectralCube out(H, W, src.wavelengths, src.gsd);
    out.band_ids = src.band_ids;
    out.nodata = src.nodata;
    const bool identity_geom = d.angle_rad == 0.0 && d.crop_h == H && d.crop_w == W;
    const double cy = 0.5 * (H - 1), cx = 0.5 * (W - 1);
    const double cs = std::cos(d.angle_rad), sn = std::sin(d.angle_rad);
    const double sy = static_cast<double>(d.crop_h) / H, sx = static_cast<double>(d.crop_w) / W;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const int oy = d.vflip ? H - 1 - y : y;
            const int ox = d.hflip ? W - 1 - x : x;
            for (int b = 0; b < src.bands; ++b) {
                if (identity_geom) {
                    out.at(oy, ox, b) = src.at(y, x, b);
                    continue;
                }
                // Output pixel -> crop window (resize back to full size) -> rotated frame -> source.
                const double ry = (y + 0.5) * sy - 0.5 + d.oy;
                const double rx = (x + 0.5) * sx - 0.5 + d.ox;
                const double dy = ry - cy, dx = rx - cx;
                const double syy = cy + cs * dy - sn * dx;
                const double sxx = cx + sn * dy + cs * dx;
                out.at(oy, ox, b) = bilinear_reflect(src, b, syy, sxx);
            }
        }
    }
    return out;
}

}  // namespace

TileSet make_tiles(const SpectralCube& msi, const SpectralCube& hsi, int tile_size, int stride,
                   const std::string& source_id) {
    if (tile_size <= 0 || stride <= 0) throw RangeError("tile size and stride must be positive");
    if (msi.height != hsi.height || msi.width != hsi.width) {
        throw ShapeError("make_tiles: input and target cubes are not on a common grid");
    }
    if (msi.height < tile_size || msi.width < tile_size) {
        throw ShapeError("make_tiles: cube " + std::to_string(msi.height) + "x" + std::to_string(msi.width) +
                         " is smaller than tile size " + std::to_string(tile_size));
    }
    TileSet set;
    for (int y = 0; y + tile_size <= msi.height; y += stride) {
        for (int x = 0; x + tile_size <= msi.width; x += stride) {
            TilePair p;
            p.msi = crop(msi, y, x, tile_size, tile_size);
            p.hsi = crop(hsi, y, x, tile_size, tile_size);
            p.provenance = {source_id, y, x};
            set.tiles.push_back(std::move(p));
        }
    }
    return set;
}

void AugmentParams::validate() const {
    if (rotation_deg.first > rotation_deg.second || rotation_deg.first < -180.0 || rotation_deg.second > 180.0) {
        throw ConfigError("rotation range must lie within [-180, 180]");
    }
    if (crop_frac.first > crop_frac.second || !(crop_frac.first > 0.0) || crop_frac.second > 1.0) {
        throw ConfigError("crop fraction range must lie within (0, 1]");
    }
    if (flip_prob < 0.0 || flip_prob > 1.0) throw ConfigError("flip probability must lie within [0, 1]");
}

AugmentParams AugmentParams::identity() {
    AugmentParams p;
    p.rotation_deg = {0.0, 0.0};
    p.crop_frac = {1.0, 1.0};
    p.hflip = false;
    p.vflip = false;
    return p;
}

TilePair augment(const TilePair& pair, const AugmentParams& params) {
    params.validate();
    const int H = pair.msi.height, W = pair.msi.width;
    if (pair.hsi.height != H || pair.hsi.width != W) throw ShapeError("augment: tiles are not co-registered");

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto in_range = [&](std::pair<double, double> r) { return r.first + (r.second - r.first) * unit(rng); };

    AugmentDraw d;
    d.angle_rad = in_range(params.rotation_deg) * std::numbers::pi / 180.0;
    const double frac = in_range(params.crop_frac);
    d.crop_h = static_cast<int>(std::lround(frac * H));
    d.crop_w = static_cast<int>(std::lround(frac * W));
    if (d.crop_h < 1 || d.crop_w < 1) throw RangeError("augment: crop collapses to less than one pixel");
    d.oy = static_cast<int>(std::floor(unit(rng) * (H - d.crop_h + 1)));
    d.ox = static_cast<int>(std::floor(unit(rng) * (W - d.crop_w + 1)));
    d.oy = std::min(d.oy, H - d.crop_h);
    d.ox = std::min(d.ox, W - d.crop_w);
    const double fh = unit(rng), fv = unit(rng);
    d.hflip = params.hflip && fh < params.flip_prob;
    d.vflip = params.vflip && fv < params.flip_prob;

    TilePair out;
    out.msi = apply_draw(pair.msi, d);
    out.hsi = apply_draw(pair.hsi, d);
    out.provenance = pair.provenance;
    out.split = pair.split;
    return out;
}

SplitResult split(const TileSet& tiles, SplitRatios ratios, std::uint64_t seed) {
    if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9 || ratios.train < 0 || ratios.val < 0 ||
        ratios.test < 0) {
        throw ConfigError("split ratios must be non-negative and sum to 1");
    }
    if (tiles.size() < 3) {
        throw DataError("split: " + std::to_string(tiles.size()) + " tiles cannot fill train/val/test partitions");
    }
    std::map<std::string, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < tiles.size(); ++i) strata[tiles.tiles[i].provenance.source_id].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<Split> label(tiles.size(), Split::Train);
    // Cumulative rounding keeps every stratum and the global totals within one tile of exact.
    std::size_t seen = 0;
    long prev_val = 0, prev_test = 0;
    for (auto& [id, idx] : strata) {
        std::shuffle(idx.begin(), idx.end(), rng);
        seen += idx.size();
        const long cum_val = std::lround(static_cast<double>(seen) * ratios.val);
        const long cum_test = std::lround(static_cast<double>(seen) * ratios.test);
        const long n = static_cast<long>(idx.size());
        const long n_val = std::min(cum_val - prev_val, n);
        const long n_test = std::min(cum_test - prev_test, n - n_val);
        prev_val += n_val;
        prev_test += n_test;
        for (long k = 0; k < n; ++k) {
            label[idx[static_cast<std::size_t>(k)]] = k < n_val ? Split::Val : (k < n_val + n_test ? Split::Test : Split::Train);
        }
    }
    SplitResult out;
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        TilePair p = tiles.tiles[i];
        p.split = label[i];
        (label[i] == Split::Train ? out.train : label[i] == Split::Val ? out.val : out.test).tiles.push_back(std::move(p));
    }
    return out;
}

SpectralCube make_synthetic_scene(const SyntheticSceneParams& params) {
    std::vector<double> wl = params.wavelengths.empty() ? nominal_wavelengths_224() : params.wavelengths;
    const double lo = wl.front(), hi = wl.back(), span = std::max(hi - lo, 1.0);
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    // Endmember spectra: baseline + red-edge style sigmoid + Gaussian absorption features.
    const int E = std::max(1, params.endmembers);
    std::vector<std::vector<double>> spectra(static_cast<std::size_t>(E), std::vector<double>(wl.size()));
    for (int e = 0; e < E; ++e) {
        const double base = 0.05 + 0.25 * u(rng);
        const double edge_pos = lo + span * (0.15 + 0.3 * u(rng));
        const double edge_amp = (u(rng) - 0.3) * 0.4;
        const double edge_width = span * (0.01 + 0.03 * u(rng));
        const int bumps = 2 + static_cast<int>(u(rng) * 3);
        std::vector<std::array<double, 3>> feats;
        for (int k = 0; k < bumps; ++k) feats.push_back({lo + span * u(rng), span * (0.02 + 0.06 * u(rng)), (u(rng) - 0.6) * 0.2});
        for (std::size_t j = 0; j < wl.size(); ++j) {
            double v = base + edge_amp / (1.0 + std::exp(-(wl[j] - edge_pos) / edge_width));
            for (const auto& f : feats) {
                const double z = (wl[j] - f[0]) / f[1];
                v += f[2] * std::exp(-0.5 * z * z);
            }
            spectra[e][j] = std::clamp(v, 0.01, 0.9);
        }
    }

    // Smooth abundance fields from random low-frequency sinusoids, softmax-normalised.
    const int H = params.height, W = params.width;
    std::vector<std::vector<double>> field(static_cast<std::size_t>(E), std::vector<double>(static_cast<std::size_t>(H) * W));
    for (int e = 0; e < E; ++e) {
        for (int k = 0; k < 4; ++k) {
            const double fy = (0.5 + 3.0 * u(rng)) * 2.0 * std::numbers::pi / H;
            const double fx = (0.5 + 3.0 * u(rng)) * 2.0 * std::numbers::pi / W;
            const double ph = 2.0 * std::numbers::pi * u(rng);
            const double amp = 1.0 + 2.0 * u(rng);
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) field[e][static_cast<std::size_t>(y) * W + x] += amp * std::sin(fy * y + fx * x + ph);
        }
    }
    SpectralCube cube(H, W, wl, params.gsd);
    std::vector<double> a(static_cast<std::size_t>(E));
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * W + x;
            double mx = -1e300, sum = 0.0;
            for (int e = 0; e < E; ++e) mx = std::max(mx, field[e][p]);
            for (int e = 0; e < E; ++e) sum += (a[e] = std::exp(field[e][p] - mx));
            for (std::size_t j = 0; j < wl.size(); ++j) {
                double v = 0.0;
                for (int e = 0; e < E; ++e) v += a[e] / sum * spectra[e][j];
                v += params.noise * noise(rng);
                cube.at(y, x, static_cast<int>(j)) = static_cast<float>(std::max(v, 0.001));
            }
        }
    }
    return cube;
}

}  // namespace specswin
