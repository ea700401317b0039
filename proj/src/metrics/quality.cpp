#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <numeric>

#include "specswin/error.hpp"
#include "specswin/metrics.hpp"

namespace specswin {

namespace {

void check_pair(const SpectralCube& ref, const SpectralCube& rec) {
    if (ref.height != rec.height || ref.width != rec.width || ref.bands != rec.bands) {
        throw ShapeError("metric inputs differ in shape: " + std::to_string(ref.height) + "x" +
                         std::to_string(ref.width) + "x" + std::to_string(ref.bands) + " vs " +
                         std::to_string(rec.height) + "x" + std::to_string(rec.width) + "x" + std::to_string(rec.bands));
    }
    if (ref.data.empty()) throw ShapeError("metric inputs are empty");
}

struct BandStats {
    double mean_ref = 0.0, mean_rec = 0.0, var_ref = 0.0, var_rec = 0.0, cov = 0.0, mse = 0.0;
};

BandStats band_stats(const SpectralCube& ref, const SpectralCube& rec, int b) {
    auto x = ref.band(b);
    auto y = rec.band(b);
    const double n = static_cast<double>(x.size());
    BandStats s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s.mean_ref += x[i];
        s.mean_rec += y[i];
    }
    s.mean_ref /= n;
    s.mean_rec /= n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - s.mean_ref, dy = y[i] - s.mean_rec, e = static_cast<double>(x[i]) - y[i];
        s.var_ref += dx * dx;
        s.var_rec += dy * dy;
        s.cov += dx * dy;
        s.mse += e * e;
    }
    s.var_ref /= n;
    s.var_rec /= n;
    s.cov /= n;
    s.mse /= n;
    return s;
}

double similarity(double mx, double my, double vx, double vy, double cxy, const QualityConstants& c) {
    const double num = (2.0 * mx * my + c.c1) * (2.0 * cxy + c.c2);
    const double den = (mx * mx + my * my + c.c1) * (vx + vy + c.c2);
    if (den == 0.0) return num == 0.0 ? 1.0 : 0.0;
    return num / den;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

double psnr(const SpectralCube& ref, const SpectralCube& rec) {
    check_pair(ref, rec);
    double mse = 0.0;
    float peak = ref.data.front();
    for (std::size_t i = 0; i < ref.data.size(); ++i) {
        const double e = static_cast<double>(ref.data[i]) - rec.data[i];
        mse += e * e;
        peak = std::max(peak, ref.data[i]);
    }
    mse /= static_cast<double>(ref.data.size());
    if (mse == 0.0) return kPerfectPsnr;
    return 10.0 * std::log10(static_cast<double>(peak) * peak / mse);
}

std::vector<double> psnr_per_band(const SpectralCube& ref, const SpectralCube& rec) {
    check_pair(ref, rec);
    std::vector<double> out;
    for (int b = 0; b < ref.bands; ++b) {
        auto x = ref.band(b);
        const double peak = *std::max_element(x.begin(), x.end());
        const double mse = band_stats(ref, rec, b).mse;
        out.push_back(mse == 0.0 ? kPerfectPsnr : 10.0 * std::log10(peak * peak / mse));
    }
    return out;
}

ErgasResult ergas_detail(const SpectralCube& ref, const SpectralCube& rec, double ratio) {
    check_pair(ref, rec);
    ErgasResult r;
    double sum = 0.0;
    int used = 0;
    for (int b = 0; b < ref.bands; ++b) {
        const BandStats s = band_stats(ref, rec, b);
        if (s.mean_ref == 0.0) {
            ++r.excluded;
            r.contributions.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double t = s.mse / (s.mean_ref * s.mean_ref);
        r.contributions.push_back(t);
        sum += t;
        ++used;
    }
    if (used == 0) throw DataError("ERGAS undefined: every reference band has zero mean");
    if (r.excluded > 0) std::cerr << "warning: ERGAS excluded " << r.excluded << " zero-mean band(s)\n";
    r.value = 100.0 * ratio * std::sqrt(sum / used);
    return r;
}

double ergas(const SpectralCube& ref, const SpectralCube& rec, double ratio) { return ergas_detail(ref, rec, ratio).value; }

SamResult sam_detail(const SpectralCube& ref, const SpectralCube& rec) {
    check_pair(ref, rec);
    const std::size_t px = ref.pixels();
    SamResult r;
    double sum = 0.0;
    for (std::size_t p = 0; p < px; ++p) {
        double dot = 0.0, nx = 0.0, ny = 0.0;
        for (int b = 0; b < ref.bands; ++b) {
            const double x = ref.band(b)[p], y = rec.band(b)[p];
            dot += x * y;
            nx += x * x;
            ny += y * y;
        }
        if (nx == 0.0 || ny == 0.0) {
            ++r.zero_pixels;
            continue;
        }
        sum += std::acos(std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), -1.0, 1.0));
    }
    r.degrees = sum / static_cast<double>(px) * 180.0 / std::numbers::pi;
    return r;
}

double sam(const SpectralCube& ref, const SpectralCube& rec) { return sam_detail(ref, rec).degrees; }

QualityConstants QualityConstants::from_reference(const SpectralCube& ref) {
    const auto [lo, hi] = std::minmax_element(ref.data.begin(), ref.data.end());
    const double L = static_cast<double>(*hi) - *lo;
    return {(0.01 * L) * (0.01 * L), (0.03 * L) * (0.03 * L)};
}

std::vector<double> q_per_band(const SpectralCube& ref, const SpectralCube& rec) {
    check_pair(ref, rec);
    const auto c = QualityConstants::from_reference(ref);
    std::vector<double> out;
    for (int b = 0; b < ref.bands; ++b) {
        const BandStats s = band_stats(ref, rec, b);
        out.push_back(similarity(s.mean_ref, s.mean_rec, s.var_ref, s.var_rec, s.cov, c));
    }
    return out;
}

double q_index(const SpectralCube& ref, const SpectralCube& rec) { return mean(q_per_band(ref, rec)); }

std::vector<double> ssim_per_band(const SpectralCube& ref, const SpectralCube& rec) {
    check_pair(ref, rec);
    const auto c = QualityConstants::from_reference(ref);
    std::vector<double> out;
    for (int b = 0; b < ref.bands; ++b) {
        const BandStats s = band_stats(ref, rec, b);
        const double lum = (2.0 * s.mean_ref * s.mean_rec + c.c1) / (s.mean_ref * s.mean_ref + s.mean_rec * s.mean_rec + c.c1);
        const double den = s.var_ref + s.var_rec + c.c2;
        const double cs = den == 0.0 ? 1.0 : (2.0 * s.cov + c.c2) / den;
        const double lden = s.mean_ref * s.mean_ref + s.mean_rec * s.mean_rec + c.c1;
        out.push_back((lden == 0.0 ? 1.0 : lum) * cs);
    }
    return out;
}

double ssim(const SpectralCube& ref, const SpectralCube& rec) { return mean(ssim_per_band(ref, rec)); }

double ssim_windowed(const SpectralCube& ref, const SpectralCube& rec, int window) {
    check_pair(ref, rec);
    if (window < 1 || window > ref.height || window > ref.width) throw RangeError("SSIM window does not fit the image");
    const auto c = QualityConstants::from_reference(ref);
    const double n = static_cast<double>(window) * window;
    double total = 0.0;
    std::int64_t count = 0;
    for (int b = 0; b < ref.bands; ++b) {
        for (int y0 = 0; y0 + window <= ref.height; ++y0) {
            for (int x0 = 0; x0 + window <= ref.width; ++x0) {
                double mx = 0, my = 0;
                for (int y = y0; y < y0 + window; ++y)
                    for (int x = x0; x < x0 + window; ++x) {
                        mx += ref.at(y, x, b);
                        my += rec.at(y, x, b);
                    }
                mx /= n;
                my /= n;
                double vx = 0, vy = 0, cxy = 0;
                for (int y = y0; y < y0 + window; ++y)
                    for (int x = x0; x < x0 + window; ++x) {
                        const double dx = ref.at(y, x, b) - mx, dy = rec.at(y, x, b) - my;
                        vx += dx * dx;
                        vy += dy * dy;
                        cxy += dx * dy;
                    }
                total += similarity(mx, my, vx / n, vy / n, cxy / n, c);
                ++count;
            }
        }
    }
    return total / static_cast<double>(count);
}

double rmse(const SpectralCube& ref, const SpectralCube& rec) {
    check_pair(ref, rec);
    double mse = 0.0;
    for (std::size_t i = 0; i < ref.data.size(); ++i) {
        const double e = static_cast<double>(ref.data[i]) - rec.data[i];
        mse += e * e;
    }
    return std::sqrt(mse / static_cast<double>(ref.data.size()));
}

SpectralCube select_channels(const SpectralCube& cube, const std::vector<int>& channels) {
    std::vector<double> wl;
    for (int c : channels) {
        if (c < 0 || c >= cube.bands) throw RangeError("channel " + std::to_string(c) + " out of range");
        wl.push_back(cube.wavelengths[c]);
    }
    SpectralCube out(cube.height, cube.width, {}, cube.gsd);
    out.bands = static_cast<int>(channels.size());
    out.wavelengths = std::move(wl);
    out.nodata = cube.nodata;
    out.band_ids.clear();
    out.data.resize(static_cast<std::size_t>(out.bands) * cube.pixels());
    for (std::size_t i = 0; i < channels.size(); ++i) {
        out.band_ids.push_back(cube.band_ids[channels[i]]);
        std::copy(cube.band(channels[i]).begin(), cube.band(channels[i]).end(), out.band(static_cast<int>(i)).begin());
    }
    return out;
}

MetricReport evaluate(const SpectralCube& ref, const SpectralCube& rec, std::optional<int> best_k, double ergas_ratio) {
    check_pair(ref, rec);
    MetricReport r;
    std::vector<int> channels(static_cast<std::size_t>(ref.bands));
    std::iota(channels.begin(), channels.end(), 0);
    if (best_k) {
        if (*best_k < 1) throw RangeError("best-k band subset is empty");
        const auto bp = psnr_per_band(ref, rec);
        std::stable_sort(channels.begin(), channels.end(), [&](int a, int b) { return bp[a] > bp[b]; });
        channels.resize(static_cast<std::size_t>(std::min(*best_k, ref.bands)));
        std::sort(channels.begin(), channels.end());
    }
    const SpectralCube sref = best_k ? select_channels(ref, channels) : ref;
    const SpectralCube srec = best_k ? select_channels(rec, channels) : rec;
    r.bands = channels;
    r.band_psnr = psnr_per_band(sref, srec);
    const ErgasResult e = ergas_detail(sref, srec, ergas_ratio);
    r.band_ergas = e.contributions;
    r.band_q = q_per_band(sref, srec);
    r.band_ssim = ssim_per_band(sref, srec);
    r.psnr = psnr(sref, srec);
    r.ergas = e.value;
    r.ergas_excluded = e.excluded;
    const SamResult s = sam_detail(sref, srec);
    r.sam = s.degrees;
    r.sam_zero_pixels = s.zero_pixels;
    r.q = mean(r.band_q);
    r.ssim = mean(r.band_ssim);
    r.rmse = rmse(sref, srec);
    return r;
}

}  // namespace specswin
