#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace specswin {

/// H x W x B raster with per-band wavelength metadata.
///
/// Storage is band-sequential: data[(b * height + y) * width + x]. Values are
/// float32 so that the on-disk format round-trips bit-exactly.
struct SpectralCube {
    int height = 0;
    int width = 0;
    int bands = 0;
    std::vector<float> data;
    std::vector<double> wavelengths;  // nm, strictly increasing
    double gsd = 1.0;                 // m
    std::optional<float> nodata;
    /// Index of each band in the source cube it was derived from (identity by default).
    std::vector<int> band_ids;

    SpectralCube() = default;
    SpectralCube(int h, int w, std::vector<double> wl, double gsd_m = 1.0);

    std::size_t pixels() const noexcept { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }

    float& at(int y, int x, int b) { return data[(static_cast<std::size_t>(b) * height + y) * width + x]; }
    float at(int y, int x, int b) const { return data[(static_cast<std::size_t>(b) * height + y) * width + x]; }

    std::span<float> band(int b) { return {data.data() + static_cast<std::size_t>(b) * pixels(), pixels()}; }
    std::span<const float> band(int b) const {
        return {data.data() + static_cast<std::size_t>(b) * pixels(), pixels()};
    }

    bool is_nodata(float v) const;

    /// Channel holding source band `id`, or -1.
    int channel_of(int id) const;

    /// Throws DataError when any invariant is violated.
    void validate() const;
};

/// Writes `<path>` (raw little-endian float32, band-sequential) and `<path>.meta`.
void save_cube(const SpectralCube& cube, const std::filesystem::path& path);

/// Reads a cube written by save_cube and validates it.
SpectralCube load_cube(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace specswin
