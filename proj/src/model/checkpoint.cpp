#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "specswin/error.hpp"
#include "specswin/model.hpp"

namespace specswin {

using nlohmann::json;

namespace {

constexpr char kMagic[] = "SPECSWIN-CKPT 1\n";

std::uint64_t to_le64(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
    return v;
}

}  // namespace

void save_checkpoint(const TrainedWeights& w, const std::filesystem::path& path) {
    w.validate();
    json header;
    header["config"] = json::parse(w.config.to_json());
    header["band_ids"] = w.band_ids;
    header["lineage"] = {{"stage", w.lineage.stage}, {"parent", w.lineage.parent}, {"parent_band", w.lineage.parent_band}};
    if (!w.sequence.empty()) header["sequence"] = w.sequence;
    if (!w.wavelengths.empty()) header["wavelengths"] = w.wavelengths;
    json params = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : w.params) {
        params.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
        offset += static_cast<std::uint64_t>(t.size());
    }
    header["params"] = params;
    const std::string text = header.dump();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write checkpoint " + path.string());
        out.write(kMagic, static_cast<std::streamsize>(std::strlen(kMagic)));
        const std::uint64_t len = to_le64(text.size());
        out.write(reinterpret_cast<const char*>(&len), 8);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        for (const auto& [name, t] : w.params) {
            std::vector<std::uint64_t> raw(static_cast<std::size_t>(t.size()));
            for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = to_le64(std::bit_cast<std::uint64_t>(t.vec()[i]));
            out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 8));
        }
        if (!out) throw DataError("write failed for checkpoint " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

TrainedWeights load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint not found: " + path.string());
    std::string magic(std::strlen(kMagic), '\0');
    in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
    if (!in || magic != kMagic) throw DataError("not a checkpoint file: " + path.string());
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 8);
    len = to_le64(len);
    if (!in || len > (1ull << 32)) throw DataError("corrupt checkpoint header in " + path.string());
    std::string text(static_cast<std::size_t>(len), '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError("truncated checkpoint header in " + path.string());

    TrainedWeights w;
    json header;
    try {
        header = json::parse(text);
        w.config = ModelConfig::from_json(header.at("config").dump());
        w.band_ids = header.at("band_ids").get<std::vector<int>>();
        const json& lin = header.at("lineage");
        w.lineage.stage = lin.at("stage").get<std::string>();
        w.lineage.parent = lin.at("parent").get<std::string>();
        w.lineage.parent_band = lin.at("parent_band").get<int>();
        if (header.contains("sequence")) w.sequence = header.at("sequence").get<std::vector<int>>();
        if (header.contains("wavelengths")) w.wavelengths = header.at("wavelengths").get<std::vector<double>>();
        for (const json& p : header.at("params")) {
            Tensor t(p.at("shape").get<Shape>());
            std::vector<std::uint64_t> raw(static_cast<std::size_t>(t.size()));
            in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 8));
            if (!in) throw DataError("truncated checkpoint data in " + path.string());
            for (std::size_t i = 0; i < raw.size(); ++i) t.vec()[i] = std::bit_cast<double>(to_le64(raw[i]));
            w.params.emplace_back(p.at("name").get<std::string>(), std::move(t));
        }
    } catch (const json::exception& e) {
        throw DataError("malformed checkpoint header in " + path.string() + ": " + e.what());
    }
    w.validate();
    return w;
}

}  // namespace specswin
