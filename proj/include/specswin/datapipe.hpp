#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specswin/cube.hpp"

namespace specswin {

// ---------------------------------------------------------------------------
// Multispectral synthesis from spectral response functions
// ---------------------------------------------------------------------------

struct SrfResponse {
    std::vector<double> wavelengths;  // nm
    std::vector<double> weights;      // >= 0
};

struct SrfSet {
    std::vector<SrfResponse> responses;
    std::vector<std::string> band_names;
    std::vector<double> bandwidths;  // nm

    std::size_t size() const noexcept { return responses.size(); }
    void validate() const;

    /// Gaussian responses sampled at `sample_wavelengths`.
    static SrfSet gaussian(std::span<const double> centers, std::span<const double> fwhm,
                           std::span<const double> sample_wavelengths);
};

/// Per-target-band coefficients over the source bands plus solver diagnostics.
struct SrfCoefficients {
    std::vector<std::vector<double>> c;  // [target][source band]
    std::vector<bool> rank_deficient;
    int clamped = 0;                      // negative coefficients set to zero
};

/// Least-squares fit of each target response onto the source-band response
/// profiles (unit hat functions centred on each source wavelength), followed
/// by clamping of negative coefficients.
SrfCoefficients srf_coefficients(std::span<const double> source_wavelengths, const SrfSet& srf);

/// Source band widths used as integration weights (half the distance between neighbours).
std::vector<double> band_widths(std::span<const double> wavelengths);

/// Radiance-weighted synthesis of one output band per SRF.
SpectralCube synthesize_msi(const SpectralCube& hsi, const SrfSet& srf, SrfCoefficients* diagnostics = nullptr);

// ---------------------------------------------------------------------------
// Band selection and spatial degradation
// ---------------------------------------------------------------------------

inline constexpr std::array<int, 5> kDefaultMsiBands{9, 20, 30, 40, 52};

SpectralCube select_simulated_msi(const SpectralCube& hsi, std::span<const int> band_indices = kDefaultMsiBands);

/// Bilinear downsampling sampled at output pixel centres (align-corners off).
SpectralCube downsample(const SpectralCube& cube, int factor);

/// Per-pixel linear interpolation in wavelength from the cube's bands to
/// `target_wavelengths` (constant extrapolation). Used as a reference baseline.
SpectralCube spectral_linear_interpolation(const SpectralCube& msi, std::span<const double> target_wavelengths);

/// Nominal centres for a 224-band 400-2500 nm sensor, piecewise linear through
/// the documented centres of bands 2, 9, 20, 30, 40, 48, 52, 108 and 210.
std::vector<double> nominal_wavelengths_224();

// ---------------------------------------------------------------------------
// Tiling, augmentation and splitting
// ---------------------------------------------------------------------------

enum class Split { Unassigned, Train, Val, Test };
const char* split_name(Split s);
Split parse_split(const std::string& s);

struct TileProvenance {
    std::string source_id;
    int y0 = 0;
    int x0 = 0;
};

struct TilePair {
    SpectralCube msi;
    SpectralCube hsi;
    TileProvenance provenance;
    Split split = Split::Unassigned;
};

struct TileSet {
    std::vector<TilePair> tiles;
    std::size_t size() const noexcept { return tiles.size(); }
    bool empty() const noexcept { return tiles.empty(); }
};

TileSet make_tiles(const SpectralCube& msi, const SpectralCube& hsi, int tile_size = 128, int stride = 128,
                   const std::string& source_id = "scene-0");

struct AugmentParams {
    std::pair<double, double> rotation_deg{-15.0, 15.0};
    std::pair<double, double> crop_frac{0.70, 0.90};
    bool hflip = true;
    bool vflip = true;
    double flip_prob = 0.5;  // chance that an enabled flip is applied
    std::uint64_t seed = 0;

    void validate() const;
    static AugmentParams identity();
};

/// Applies one random rotation / crop / flip draw to both tiles of the pair.
TilePair augment(const TilePair& pair, const AugmentParams& params);

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

struct SplitResult {
    TileSet train, val, test;
};

/// Stratified (by source id) deterministic partition.
SplitResult split(const TileSet& tiles, SplitRatios ratios, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic scenes for desk-scale runs
// ---------------------------------------------------------------------------

struct SyntheticSceneParams {
    int height = 128;
    int width = 128;
    std::vector<double> wavelengths;  // defaults to nominal_wavelengths_224()
    double gsd = 14.0;
    int endmembers = 4;
    double noise = 0.002;
    std::uint64_t seed = 0;
};

/// Linear mixture of smooth endmember spectra with spatially smooth abundances.
SpectralCube make_synthetic_scene(const SyntheticSceneParams& params);

}  // namespace specswin
