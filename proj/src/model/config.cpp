#include <json.hpp>
#include <set>

#include "specswin/error.hpp"
#include "specswin/model.hpp"

namespace specswin {

using nlohmann::json;

std::array<int, 3> ModelConfig::stage_grid(int s) const {
    return {(input.height / patch[0]) >> s, (input.width / patch[1]) >> s, input.depth / patch[2]};
}

void ModelConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("model config: " + m); };
    for (int p : patch)
        if (p < 1) fail("patch sizes must be positive");
    for (int w : window)
        if (w < 1) fail("window sizes must be positive");
    if (embed_dim < 1) fail("embed_dim must be positive");
    if (depths.empty()) fail("at least one encoder stage is required");
    if (depths.size() != heads.size()) fail("depths and heads must have the same length");
    for (int s = 0; s < stages(); ++s) {
        if (depths[s] < 1) fail("every stage needs at least one block");
        if (heads[s] < 1 || stage_dim(s) % heads[s] != 0) {
            fail("stage " + std::to_string(s) + " width " + std::to_string(stage_dim(s)) + " is not divisible by " +
                 std::to_string(heads[s]) + " heads");
        }
    }
    if (!(mlp_ratio > 0.0)) fail("mlp_ratio must be positive");
    if (out_bands < 1) fail("out_bands must be >= 1");
    if (decoder_full_dim < 1) fail("decoder_full_dim must be positive");
    try {
        input.validate();
    } catch (const DataError& e) {
        fail(e.what());
    }
    const int down = 1 << (stages() - 1);
    if (input.height % (patch[0] * down) != 0 || input.width % (patch[1] * down) != 0) {
        fail("input " + std::to_string(input.height) + "x" + std::to_string(input.width) + " must be divisible by " +
             std::to_string(patch[0] * down) + " for " + std::to_string(stages()) + " stages");
    }
    if (input.depth % patch[2] != 0) fail("input depth must be divisible by the depth patch size");
}

ModelConfig ModelConfig::full(int out_bands) {
    ModelConfig c;
    c.out_bands = out_bands;
    return c;
}

ModelConfig ModelConfig::toy(int height, int width, int out_bands) {
    ModelConfig c;
    c.embed_dim = 12;
    c.depths = {2, 2};
    c.heads = {2, 4};
    c.window = {4, 4, 4};
    c.mlp_ratio = 2.0;
    c.out_bands = out_bands;
    c.input = VolumeSpec{height, width, 32, 1};
    c.decoder_full_dim = 8;
    return c;
}

bool operator==(const ModelConfig& a, const ModelConfig& b) {
    return a.patch == b.patch && a.embed_dim == b.embed_dim && a.depths == b.depths && a.heads == b.heads &&
           a.window == b.window && a.mlp_ratio == b.mlp_ratio && a.out_bands == b.out_bands &&
           a.input.height == b.input.height && a.input.width == b.input.width && a.input.depth == b.input.depth &&
           a.input.channels == b.input.channels && a.decoder_full_dim == b.decoder_full_dim;
}

std::string ModelConfig::to_json() const {
    json j;
    j["patch"] = patch;
    j["embed_dim"] = embed_dim;
    j["depths"] = depths;
    j["heads"] = heads;
    j["window"] = window;
    j["mlp_ratio"] = mlp_ratio;
    j["out_bands"] = out_bands;
    j["input"] = {{"height", input.height}, {"width", input.width}, {"depth", input.depth}, {"channels", input.channels}};
    j["decoder_full_dim"] = decoder_full_dim;
    return j.dump();
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
    }
}

}  // namespace

ModelConfig ModelConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("model config must be a JSON object");
    reject_unknown(j, {"patch", "embed_dim", "depths", "heads", "window", "mlp_ratio", "out_bands", "input",
                       "decoder_full_dim"},
                   "model");
    ModelConfig c;
    try {
        if (j.contains("patch")) c.patch = j["patch"].get<std::array<int, 3>>();
        if (j.contains("embed_dim")) c.embed_dim = j["embed_dim"].get<int>();
        if (j.contains("depths")) c.depths = j["depths"].get<std::vector<int>>();
        if (j.contains("heads")) c.heads = j["heads"].get<std::vector<int>>();
        if (j.contains("window")) c.window = j["window"].get<std::array<int, 3>>();
        if (j.contains("mlp_ratio")) c.mlp_ratio = j["mlp_ratio"].get<double>();
        if (j.contains("out_bands")) c.out_bands = j["out_bands"].get<int>();
        if (j.contains("decoder_full_dim")) c.decoder_full_dim = j["decoder_full_dim"].get<int>();
        if (j.contains("input")) {
            const json& in = j["input"];
            reject_unknown(in, {"height", "width", "depth", "channels"}, "model.input");
            if (in.contains("height")) c.input.height = in["height"].get<int>();
            if (in.contains("width")) c.input.width = in["width"].get<int>();
            if (in.contains("depth")) c.input.depth = in["depth"].get<int>();
            if (in.contains("channels")) c.input.channels = in["channels"].get<int>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model config has a wrongly typed value: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace specswin
