#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "specswin/bandseq.hpp"
#include "specswin/cli.hpp"
#include "specswin/error.hpp"

namespace specswin::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

std::vector<int> read_bands(const json& v) {
    if (v.is_string()) return parse_band_list(v.get<std::string>());
    return v.get<std::vector<int>>();
}

std::filesystem::path anchor(const std::filesystem::path& p, const std::filesystem::path& base) {
    return p.is_absolute() ? p : base / p;
}

ModelConfig read_model(const json& j) {
    if (j.contains("preset")) {
        reject_unknown(j, {"preset", "height", "width"}, "model");
        const auto preset = j.at("preset").get<std::string>();
        if (preset == "toy") {
            const int h = j.value("height", 16), w = j.value("width", 16);
            return ModelConfig::toy(h, w);
        }
        if (preset == "full") {
            ModelConfig c = ModelConfig::full();
            read(j, "height", c.input.height);
            read(j, "width", c.input.width);
            c.validate();
            return c;
        }
        throw ConfigError("unknown model preset '" + preset + "' (expected toy or full)");
    }
    return ModelConfig::from_json(j.dump());
}

}  // namespace

std::filesystem::path RunConfig::resolve_data(const std::filesystem::path& p) const {
    return p.empty() || p.is_absolute() ? p : data.root / p;
}

void RunConfig::validate() const {
    if (data.factor < 2) throw ConfigError("data.factor must be >= 2");
    if (data.tile < 1) throw ConfigError("data.tile must be positive");
    if (data.stride < 0) throw ConfigError("data.stride must be non-negative");
    if (data.msi_bands.empty()) throw ConfigError("data.msi_bands is empty");
    const double total = data.split.train + data.split.val + data.split.test;
    if (std::abs(total - 1.0) > 1e-9 || data.split.train < 0 || data.split.val < 0 || data.split.test < 0) {
        throw ConfigError("data.split ratios must be non-negative and sum to 1");
    }
    if (sequence.depth < 1) throw ConfigError("sequence.depth must be positive");
    model.validate();
    if (cascade.total_bands < 1) throw ConfigError("cascade.total_bands must be positive");
    if (cascade.base_epochs < 1 || cascade.floor < 0) throw ConfigError("cascade epoch constants must be positive");
    if (!(cascade.decay > 0.0 && cascade.decay <= 1.0)) throw ConfigError("cascade.decay must lie in (0, 1]");
    if (!(cascade.finetune_scale > 0.0)) throw ConfigError("cascade.finetune_scale must be positive");
    if (train.batch_size < 1) throw ConfigError("train.batch_size must be positive");
    if (!(train.lr > 0.0) || train.lr_min < 0.0 || train.lr_min > train.lr) {
        throw ConfigError("train.lr must be positive and train.lr_min within [0, lr]");
    }
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(j, {"seed", "data", "sequence", "model", "cascade", "train", "output"}, "config");
    RunConfig c;
    c.data.root = base_dir;
    c.checkpoint_root = base_dir / "checkpoints";
    try {
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("data")) {
            const json& d = j.at("data");
            reject_unknown(d, {"root", "source", "dataset", "msi_bands", "factor", "tile", "stride", "split"}, "data");
            if (d.contains("root")) c.data.root = anchor(d.at("root").get<std::string>(), base_dir);
            if (d.contains("source")) c.data.source = d.at("source").get<std::string>();
            if (d.contains("dataset")) c.data.dataset = d.at("dataset").get<std::string>();
            if (d.contains("msi_bands")) c.data.msi_bands = read_bands(d.at("msi_bands"));
            read(d, "factor", c.data.factor);
            read(d, "tile", c.data.tile);
            read(d, "stride", c.data.stride);
            if (d.contains("split")) {
                const json& s = d.at("split");
                reject_unknown(s, {"train", "val", "test"}, "data.split");
                read(s, "train", c.data.split.train);
                read(s, "val", c.data.split.val);
                read(s, "test", c.data.split.test);
            }
        }
        if (j.contains("sequence")) {
            const json& s = j.at("sequence");
            reject_unknown(s, {"order", "depth"}, "sequence");
            if (s.contains("order")) c.sequence.order = read_bands(s.at("order"));
            read(s, "depth", c.sequence.depth);
        }
        if (j.contains("model")) c.model = read_model(j.at("model"));
        if (j.contains("cascade")) {
            const json& k = j.at("cascade");
            reject_unknown(k, {"strategy", "levels", "total_bands", "base_epochs", "decay", "floor", "finetune_scale"},
                           "cascade");
            if (k.contains("strategy")) c.cascade.strategy = parse_strategy(k.at("strategy").get<std::string>());
            read(k, "levels", c.cascade.levels);
            read(k, "total_bands", c.cascade.total_bands);
            read(k, "base_epochs", c.cascade.base_epochs);
            read(k, "decay", c.cascade.decay);
            read(k, "floor", c.cascade.floor);
            read(k, "finetune_scale", c.cascade.finetune_scale);
        }
        if (j.contains("train")) {
            const json& t = j.at("train");
            reject_unknown(t, {"batch_size", "lr", "lr_min", "sqrt_loss", "augment", "resume"}, "train");
            read(t, "batch_size", c.train.batch_size);
            read(t, "lr", c.train.lr);
            read(t, "lr_min", c.train.lr_min);
            read(t, "sqrt_loss", c.train.sqrt_loss);
            read(t, "augment", c.train.augment);
            read(t, "resume", c.train.resume);
        }
        if (j.contains("output")) {
            const json& o = j.at("output");
            reject_unknown(o, {"checkpoint_root"}, "output");
            if (o.contains("checkpoint_root")) {
                c.checkpoint_root = anchor(o.at("checkpoint_root").get<std::string>(), base_dir);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config has a wrongly typed value: ") + e.what());
    } catch (const DataError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_run_config(ss.str(), base);
}

void apply_env_overrides(RunConfig& cfg) {
    if (const char* v = std::getenv("SPECSWIN_DATA_ROOT"); v && *v) cfg.data.root = v;
    if (const char* v = std::getenv("SPECSWIN_CKPT_ROOT"); v && *v) cfg.checkpoint_root = v;
}

}  // namespace specswin::cli
