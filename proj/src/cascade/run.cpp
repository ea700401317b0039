#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "specswin/cascade.hpp"
#include "specswin/error.hpp"

namespace specswin {

namespace {

std::string level_stage(int k) { return "level-" + std::to_string(k); }
std::string band_stage(int b) { return "band-" + std::to_string(b); }

std::vector<double> wavelengths_of(const TileSet& data, const std::vector<int>& bands) {
    const SpectralCube& hsi = data.tiles.front().hsi;
    std::vector<double> out;
    for (int b : bands) {
        const int ch = hsi.channel_of(b);
        if (ch < 0) throw DataError("band " + std::to_string(b) + " is not present in the training targets");
        out.push_back(hsi.wavelengths[static_cast<std::size_t>(ch)]);
    }
    return out;
}

std::string stage_of(const LineageRecord& r) {
    return r.kind == LineageRecord::Kind::Level ? level_stage(r.id) : band_stage(r.id);
}

}  // namespace

TrainedWeights extract_band(const TrainedWeights& weights, int band, Lineage lineage) {
    auto it = std::find(weights.band_ids.begin(), weights.band_ids.end(), band);
    if (it == weights.band_ids.end()) throw DataError("weights do not predict band " + std::to_string(band));
    const auto row = static_cast<std::int64_t>(it - weights.band_ids.begin());
    TrainedWeights out;
    out.config = weights.config;
    out.config.out_bands = 1;
    out.band_ids = {band};
    out.lineage = std::move(lineage);
    out.sequence = weights.sequence;
    if (!weights.wavelengths.empty()) out.wavelengths = {weights.wavelengths[static_cast<std::size_t>(row)]};
    for (const auto& [name, t] : weights.params) {
        if (name == "head.weight") {
            const std::int64_t F = t.dim(1);
            Tensor w({1, F});
            std::copy_n(t.data() + row * F, F, w.data());
            out.params.emplace_back(name, std::move(w));
        } else if (name == "head.bias") {
            out.params.emplace_back(name, Tensor({1}, t[row]));
        } else {
            out.params.emplace_back(name, t);
        }
    }
    out.validate();
    return out;
}

void write_lineage(const std::filesystem::path& path, const std::vector<LineageRecord>& records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write lineage manifest " + path.string());
    out << "# specswin-lineage 1\n";
    for (const auto& r : records) {
        const std::string parent = r.parent.empty() ? "-" : r.parent;
        if (r.kind == LineageRecord::Kind::Level) {
            out << "level " << r.id << ' ' << r.checkpoint << ' ' << parent << '\n';
        } else {
            out << "band " << r.id << ' ' << r.checkpoint << ' ' << parent << ' '
                << (r.parent_band < 0 ? std::string("-") : std::to_string(r.parent_band)) << '\n';
        }
    }
    if (!out) throw DataError("write failed for lineage manifest " + path.string());
}

std::vector<LineageRecord> read_lineage(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("lineage manifest not found: " + path.string());
    std::vector<LineageRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string kind, parent, parent_band;
        LineageRecord r;
        ss >> kind >> r.id >> r.checkpoint >> parent;
        if (kind == "level") {
            r.kind = LineageRecord::Kind::Level;
        } else if (kind == "band") {
            r.kind = LineageRecord::Kind::Band;
            ss >> parent_band;
        } else {
            ss.setstate(std::ios::failbit);
        }
        if (!ss) throw DataError("malformed lineage line " + std::to_string(lineno) + ": " + line);
        r.parent = parent == "-" ? "" : parent;
        r.parent_band = (parent_band.empty() || parent_band == "-") ? -1 : std::stoi(parent_band);
        out.push_back(std::move(r));
    }
    return out;
}

void validate_lineage(const std::vector<LineageRecord>& records) {
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string stage = stage_of(r);
        if (seen.count(stage)) throw DataError("lineage lists " + stage + " twice");
        if (r.parent.empty()) {
            if (!(r.kind == LineageRecord::Kind::Level && r.id == 0)) throw DataError("lineage root must be level-0, got " + stage);
        } else if (!seen.count(r.parent)) {
            throw DataError("lineage parent " + r.parent + " of " + stage + " is not an earlier entry");
        }
        seen[stage] = i;
    }
    if (!records.empty() && !seen.count(level_stage(0))) throw DataError("lineage has no level-0 root");
}

CascadeResult run_cascade(const CascadePyramid& pyramid, const EpochSchedule& schedule, const CascadeOptions& options,
                          const SplitResult& data) {
    pyramid.validate();
    const int K = static_cast<int>(pyramid.levels.size());
    if (static_cast<int>(schedule.level_epochs.size()) < K) {
        throw ConfigError("epoch schedule has " + std::to_string(schedule.level_epochs.size()) + " levels, pyramid has " +
                          std::to_string(K));
    }
    if (data.train.empty()) throw DataError("cascade: training split is empty");
    if (options.out_dir.empty()) throw ConfigError("cascade: output directory not set");
    std::filesystem::create_directories(options.out_dir);

    CascadeResult result;
    auto log = [&](const std::string& stage) {
        return [&options, stage](int epoch, double loss) {
            if (options.on_epoch) options.on_epoch(stage, epoch, loss);
        };
    };

    TrainedWeights prev;
    for (int k = 0; k < K; ++k) {
        const std::vector<int> bands = pyramid.cumulative(k);
        const std::string file = level_stage(k) + ".ckpt";
        const auto path = options.out_dir / file;
        TrainedWeights w;
        if (options.resume && std::filesystem::exists(path)) {
            w = load_checkpoint(path);
            if (w.band_ids != bands) throw DataError(path.string() + " was trained on a different band set");
            result.level_epochs_run.push_back(0);
        } else {
            ModelConfig cfg = options.model;
            cfg.out_bands = static_cast<int>(bands.size());
            const std::uint64_t seed = options.train.seed + 7919ull * static_cast<std::uint64_t>(k + 1);
            SpecSwin3D net(cfg, seed);
            if (k > 0) net.warm_start(prev, bands);
            TrainOptions opt = options.train;
            opt.epochs = schedule.level_epochs[k];
            opt.seed = seed;
            opt.stage_id = level_stage(k);
            opt.on_epoch = log(opt.stage_id);
            train(net, data.train, options.sequence, bands, opt);
            w = net.snapshot(bands, Lineage{level_stage(k), k > 0 ? level_stage(k - 1) : "", -1});
            w.sequence = options.sequence.order;
            w.wavelengths = wavelengths_of(data.train, bands);
            save_checkpoint(w, path);
            result.level_epochs_run.push_back(opt.epochs);
        }
        result.lineage.push_back({LineageRecord::Kind::Level, k, file, k > 0 ? level_stage(k - 1) : "", -1});
        prev = std::move(w);
        if (k == options.stop_after_level) {
            write_lineage(options.out_dir / "lineage.txt", result.lineage);
            return result;
        }
    }

    std::map<int, TrainedWeights> cascade_weights;
    for (int c : pyramid.cascade_bands()) {
        const std::string file = band_stage(c) + ".ckpt";
        TrainedWeights w = extract_band(prev, c, Lineage{band_stage(c), level_stage(K - 1), -1});
        save_checkpoint(w, options.out_dir / file);
        result.lineage.push_back({LineageRecord::Kind::Band, c, file, level_stage(K - 1), -1});
        cascade_weights.emplace(c, std::move(w));
    }

    result.finetune_plan = plan_finetune(pyramid, data.train, schedule.finetune_scale);
    for (auto& p : result.finetune_plan) {
        if (auto it = schedule.finetune_epochs.find(p.band); it != schedule.finetune_epochs.end()) p.epochs = it->second;
        const std::string file = band_stage(p.band) + ".ckpt";
        const auto path = options.out_dir / file;
        if (options.resume && std::filesystem::exists(path)) {
            const TrainedWeights w = load_checkpoint(path);
            if (w.band_ids != std::vector<int>{p.band}) throw DataError(path.string() + " predicts a different band");
            result.finetune_epochs_run[p.band] = 0;
        } else {
            ModelConfig cfg = options.model;
            cfg.out_bands = 1;
            const std::uint64_t seed = options.train.seed + 104729ull * static_cast<std::uint64_t>(p.band + 1);
            SpecSwin3D net(cfg, seed);
            const int parent = p.parent;
            net.warm_start(cascade_weights.at(parent), std::span<const int>(&parent, 1));
            TrainOptions opt = options.train;
            opt.epochs = p.epochs;
            opt.seed = seed;
            opt.stage_id = band_stage(p.band);
            opt.on_epoch = log(opt.stage_id);
            const int target = p.band;
            train(net, data.train, options.sequence, std::span<const int>(&target, 1), opt);
            TrainedWeights w = net.snapshot({p.band}, Lineage{band_stage(p.band), band_stage(parent), parent});
            w.sequence = options.sequence.order;
            w.wavelengths = wavelengths_of(data.train, {p.band});
            save_checkpoint(w, path);
            result.finetune_epochs_run[p.band] = p.epochs;
        }
        result.lineage.push_back({LineageRecord::Kind::Band, p.band, file, band_stage(p.parent), p.parent});
    }
    validate_lineage(result.lineage);
    write_lineage(options.out_dir / "lineage.txt", result.lineage);
    result.completed = true;
    return result;
}

}  // namespace specswin
