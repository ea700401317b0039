#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "specswin/cube.hpp"

namespace specswin {

/// PSNR reported for a perfect reconstruction.
inline constexpr double kPerfectPsnr = std::numeric_limits<double>::infinity();

/// 10 log10(max(ref)^2 / MSE) over every pixel and band.
double psnr(const SpectralCube& ref, const SpectralCube& rec);
/// Per-band PSNR, each band against its own reference maximum.
std::vector<double> psnr_per_band(const SpectralCube& ref, const SpectralCube& rec);

struct ErgasResult {
    double value = 0.0;
    std::vector<double> contributions;  // (RMSE_b / mu_b)^2, NaN for excluded bands
    int excluded = 0;                   // bands skipped because their reference mean is zero
};

/// 100 * ratio * sqrt(mean_b (RMSE_b / mu_b)^2). ratio = 1 leaves out the resolution factor.
ErgasResult ergas_detail(const SpectralCube& ref, const SpectralCube& rec, double ratio = 1.0);
double ergas(const SpectralCube& ref, const SpectralCube& rec, double ratio = 1.0);

struct SamResult {
    double degrees = 0.0;
    std::int64_t zero_pixels = 0;  // pixels with a zero spectrum, counted as 0 degrees
};
SamResult sam_detail(const SpectralCube& ref, const SpectralCube& rec);
double sam(const SpectralCube& ref, const SpectralCube& rec);

/// Stabilising constants derived from the reference dynamic range L = max - min.
struct QualityConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    static QualityConstants from_reference(const SpectralCube& ref);
};

/// Global per-band luminance/contrast/correlation index.
std::vector<double> q_per_band(const SpectralCube& ref, const SpectralCube& rec);
double q_index(const SpectralCube& ref, const SpectralCube& rec);

/// Global-statistics structural similarity, averaged over bands.
std::vector<double> ssim_per_band(const SpectralCube& ref, const SpectralCube& rec);
double ssim(const SpectralCube& ref, const SpectralCube& rec);
/// Sliding square-window variant (valid positions only), averaged over windows and bands.
double ssim_windowed(const SpectralCube& ref, const SpectralCube& rec, int window = 7);

double rmse(const SpectralCube& ref, const SpectralCube& rec);

struct MetricReport {
    std::vector<int> bands;  // channels of the inputs that were aggregated
    std::vector<double> band_psnr, band_ergas, band_q, band_ssim;
    double psnr = 0.0;
    double ergas = 0.0;
    double sam = 0.0;
    double q = 0.0;
    double ssim = 0.0;
    double rmse = 0.0;
    std::int64_t sam_zero_pixels = 0;
    int ergas_excluded = 0;
};

/// All metrics; with best_k set, only the k bands with the highest per-band PSNR are aggregated.
MetricReport evaluate(const SpectralCube& ref, const SpectralCube& rec, std::optional<int> best_k = std::nullopt,
                      double ergas_ratio = 1.0);

/// Copy of the given channels.
SpectralCube select_channels(const SpectralCube& cube, const std::vector<int>& channels);

// ---------------------------------------------------------------------------
// Spectral indices and change detection
// ---------------------------------------------------------------------------

enum class IndexKind { NDVI, NBR };
const char* index_name(IndexKind k);

struct WavelengthWindow {
    double lo = 0.0;
    double hi = 0.0;
};
inline constexpr WavelengthWindow kRedWindow{620.0, 700.0};
inline constexpr WavelengthWindow kNirWindow{760.0, 900.0};
inline constexpr WavelengthWindow kSwir2Window{2080.0, 2350.0};

/// Channel whose wavelength is closest to the window centre among those inside it.
int resolve_band(const SpectralCube& cube, WavelengthWindow window);

struct IndexMap {
    int height = 0;
    int width = 0;
    IndexKind kind = IndexKind::NDVI;
    std::vector<double> values;
    std::vector<std::uint8_t> nodata;
    double wavelength_a = 0.0;  // NIR
    double wavelength_b = 0.0;  // Red or SWIR2

    double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// (A - B) / (A + B) per pixel; 0 and a nodata flag where A + B = 0.
IndexMap compute_index(const SpectralCube& cube, IndexKind kind);
IndexMap normalized_difference(const SpectralCube& cube, int channel_a, int channel_b, IndexKind kind);

/// 1 where pre - post > threshold; nodata pixels in either map stay 0.
std::vector<std::uint8_t> threshold_change(const IndexMap& pre, const IndexMap& post, double threshold);

}  // namespace specswin
