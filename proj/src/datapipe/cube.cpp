#include "specswin/cube.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "specswin/error.hpp"

namespace specswin {

namespace {

constexpr const char* kFormatTag = "specswin-cube-1";

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_float(float v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const std::string& key) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            if constexpr (std::is_same_v<T, int>) {
                out.push_back(std::stoi(item));
            } else {
                out.push_back(std::stod(item));
            }
        } catch (const std::exception&) {
            throw DataError("cube metadata: cannot parse '" + item + "' in " + key);
        }
    }
    return out;
}

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
    }
    return v;
}

}  // namespace

SpectralCube::SpectralCube(int h, int w, std::vector<double> wl, double gsd_m)
    : height(h), width(w), bands(static_cast<int>(wl.size())), wavelengths(std::move(wl)), gsd(gsd_m) {
    data.assign(static_cast<std::size_t>(h) * w * bands, 0.0f);
    band_ids.resize(static_cast<std::size_t>(bands));
    for (int b = 0; b < bands; ++b) band_ids[b] = b;
}

bool SpectralCube::is_nodata(float v) const {
    if (!nodata) return false;
    if (std::isnan(*nodata)) return std::isnan(v);
    return v == *nodata;
}

int SpectralCube::channel_of(int id) const {
    for (int b = 0; b < bands; ++b)
        if (band_ids[b] == id) return b;
    return -1;
}

void SpectralCube::validate() const {
    if (height <= 0 || width <= 0 || bands <= 0) {
        throw DataError("cube dimensions must be positive");
    }
    if (data.size() != static_cast<std::size_t>(height) * width * bands) {
        throw DataError("cube data size does not match height x width x bands");
    }
    if (static_cast<int>(wavelengths.size()) != bands) {
        throw DataError("cube has " + std::to_string(bands) + " bands but " + std::to_string(wavelengths.size()) +
                        " wavelengths");
    }
    if (static_cast<int>(band_ids.size()) != bands) {
        throw DataError("cube band id list does not match band count");
    }
    for (std::size_t i = 1; i < wavelengths.size(); ++i) {
        if (!(wavelengths[i] > wavelengths[i - 1])) throw DataError("cube wavelengths are not strictly increasing");
    }
    if (!(gsd > 0.0) || !std::isfinite(gsd)) throw DataError("cube gsd must be positive");
    for (std::size_t i = 0; i < data.size(); ++i) {
        const float v = data[i];
        if (!std::isfinite(v) && !is_nodata(v)) {
            throw DataError("cube contains a non-finite value outside the nodata mask at element " +
                            std::to_string(i));
        }
    }
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    auto p = path;
    p += ".meta";
    return p;
}

void save_cube(const SpectralCube& cube, const std::filesystem::path& path) {
    cube.validate();
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot open " + path.string() + " for writing");
        std::vector<std::uint32_t> raw(cube.data.size());
        for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = to_le(std::bit_cast<std::uint32_t>(cube.data[i]));
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
        if (!out) throw DataError("write failed for " + path.string());
    }
    std::ofstream meta(sidecar_path(path));
    if (!meta) throw DataError("cannot open sidecar for " + path.string());
    meta << "format = " << kFormatTag << '\n';
    meta << "height = " << cube.height << '\n';
    meta << "width = " << cube.width << '\n';
    meta << "bands = " << cube.bands << '\n';
    meta << "interleave = bsq\ndtype = float32\nbyte_order = little\n";
    meta << "wavelengths = ";
    for (int b = 0; b < cube.bands; ++b) meta << (b ? "," : "") << fmt_double(cube.wavelengths[b]);
    meta << "\nband_ids = ";
    for (int b = 0; b < cube.bands; ++b) meta << (b ? "," : "") << cube.band_ids[b];
    meta << "\ngsd = " << fmt_double(cube.gsd) << '\n';
    meta << "nodata = " << (cube.nodata ? fmt_float(*cube.nodata) : std::string("none")) << '\n';
    if (!meta) throw DataError("write failed for sidecar of " + path.string());
}

SpectralCube load_cube(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DataError("cube file not found: " + path.string());
    const auto meta_path = sidecar_path(path);
    if (!std::filesystem::exists(meta_path)) throw DataError("cube sidecar metadata not found: " + meta_path.string());

    std::map<std::string, std::string> kv;
    std::ifstream meta(meta_path);
    std::string line;
    while (std::getline(meta, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("malformed metadata line: " + line);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw DataError("cube metadata missing key '" + k + "'");
        return it->second;
    };
    if (need("format") != kFormatTag) throw DataError("unsupported cube format tag: " + need("format"));
    if (kv.count("dtype") && kv["dtype"] != "float32") throw DataError("unsupported dtype " + kv["dtype"]);
    if (kv.count("interleave") && kv["interleave"] != "bsq") throw DataError("unsupported interleave " + kv["interleave"]);

    SpectralCube cube;
    try {
        cube.height = std::stoi(need("height"));
        cube.width = std::stoi(need("width"));
        cube.bands = std::stoi(need("bands"));
        cube.gsd = std::stod(need("gsd"));
    } catch (const std::invalid_argument&) {
        throw DataError("cube metadata has a non-numeric dimension");
    }
    cube.wavelengths = parse_list<double>(need("wavelengths"), "wavelengths");
    if (static_cast<int>(cube.wavelengths.size()) != cube.bands) {
        throw DataError("cube metadata mismatch: " + std::to_string(cube.bands) + " bands but " +
                        std::to_string(cube.wavelengths.size()) + " wavelengths");
    }
    if (kv.count("band_ids")) {
        cube.band_ids = parse_list<int>(kv["band_ids"], "band_ids");
    } else {
        cube.band_ids.resize(static_cast<std::size_t>(cube.bands));
        for (int b = 0; b < cube.bands; ++b) cube.band_ids[b] = b;
    }
    const std::string nd = kv.count("nodata") ? kv["nodata"] : "none";
    if (nd != "none") cube.nodata = std::stof(nd);

    const std::size_t n = static_cast<std::size_t>(cube.height) * cube.width * cube.bands;
    if (std::filesystem::file_size(path) != n * 4) {
        throw DataError("cube data size " + std::to_string(std::filesystem::file_size(path)) +
                        " bytes does not match metadata (" + std::to_string(n * 4) + ")");
    }
    std::vector<std::uint32_t> raw(n);
    std::ifstream in(path, std::ios::binary);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 4));
    if (!in) throw DataError("short read on " + path.string());
    cube.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) cube.data[i] = std::bit_cast<float>(to_le(raw[i]));
    cube.validate();
    return cube;
}

}  // namespace specswin
