#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "specswin/cube.hpp"

namespace specswin::testing {

inline SpectralCube random_cube(int h, int w, int b, std::uint64_t seed, double lo = 0.05, double hi = 1.0) {
    std::vector<double> wl;
    for (int i = 0; i < b; ++i) wl.push_back(400.0 + 10.0 * i);
    SpectralCube c(h, w, wl, 1.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    for (auto& v : c.data) v = static_cast<float>(u(rng));
    return c;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("specswin-test-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace specswin::testing
