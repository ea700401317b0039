#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "specswin/bandseq.hpp"
#include "specswin/cli.hpp"
#include "specswin/error.hpp"
#include "specswin/train.hpp"

namespace specswin::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestTag = "# specswin-dataset 1";

std::string tile_name(const TileProvenance& p) {
    std::string src = p.source_id;
    std::replace_if(src.begin(), src.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }, '_');
    return src + "_y" + std::to_string(p.y0) + "_x" + std::to_string(p.x0);
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::ostringstream ss;
    ss << std::setprecision(10) << v;
    return ss.str();
}

void check_ratios(const SplitRatios& r) {
    if (r.train < 0 || r.val < 0 || r.test < 0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
        throw ConfigError("split ratios must be non-negative and sum to 1");
    }
}

BandSequence resolve_sequence(const RunConfig& cfg, const std::vector<int>& msi_bands) {
    BandSequence seq = cfg.sequence.order.empty() ? build_sequence(msi_bands, cfg.sequence.depth)
                                                  : BandSequence::from_order(cfg.sequence.order);
    for (int b : seq.bands) {
        if (std::find(msi_bands.begin(), msi_bands.end(), b) == msi_bands.end()) {
            throw ConfigError("sequence uses band " + std::to_string(b) + ", which is not an input band");
        }
    }
    if (seq.bands.size() != msi_bands.size()) throw ConfigError("sequence must use every input band");
    if (!seq.is_complete()) throw ConfigError("sequence does not place every band pair side by side");
    return seq;
}

json plan_json(const CascadePyramid& pyr, const EpochSchedule& sch, const std::vector<FinetunePlan>& plan) {
    json j;
    j["strategy"] = strategy_name(pyr.strategy);
    j["total_bands"] = pyr.total_bands;
    j["levels"] = pyr.levels;
    j["level_epochs"] = sch.level_epochs;
    j["finetune_bands"] = pyr.finetune_bands;
    json ft = json::array();
    for (const auto& p : plan) {
        ft.push_back({{"band", p.band},
                      {"parent", p.parent},
                      {"similarity", p.similarity},
                      {"distance", p.distance},
                      {"epochs", p.epochs}});
    }
    j["finetune"] = ft;
    return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

void cmd_simulate(const SimulateArgs& a, std::ostream& log) {
    if (!a.seed) throw ConfigError("simulate requires --seed");
    if (a.input.empty()) throw ConfigError("simulate requires --input");
    if (a.out.empty()) throw ConfigError("simulate requires --out");
    if (a.bands.empty()) throw ConfigError("simulate requires --bands");
    if (a.factor < 2) throw ConfigError("--factor must be >= 2");
    if (a.tile < 1 || a.stride < 0) throw ConfigError("--tile must be positive and --stride non-negative");
    check_ratios(a.ratios);
    if (!fs::exists(a.input)) throw DataError("source cube not found: " + a.input.string());

    const SpectralCube hsi = load_cube(a.input);
    const SpectralCube msi = select_simulated_msi(hsi, a.bands);
    const SpectralCube hsi_lr = downsample(hsi, a.factor);
    const SpectralCube msi_lr = downsample(msi, a.factor);
    const TileSet tiles = make_tiles(msi_lr, hsi_lr, a.tile, a.stride > 0 ? a.stride : a.tile, a.input.stem().string());
    const SplitResult parts = split(tiles, a.ratios, *a.seed);

    const fs::path tile_dir = a.out / "tiles";
    if (fs::exists(tile_dir)) fs::remove_all(tile_dir);
    fs::create_directories(tile_dir);
    std::ostringstream manifest;
    manifest << kManifestTag << '\n';
    for (const TileSet* set : {&parts.train, &parts.val, &parts.test}) {
        for (const auto& t : set->tiles) {
            const std::string name = tile_name(t.provenance);
            save_cube(t.msi, tile_dir / (name + ".msi"));
            save_cube(t.hsi, tile_dir / (name + ".hsi"));
            manifest << name << ' ' << split_name(t.split) << ' ' << t.provenance.source_id << ' ' << t.provenance.y0
                     << ' ' << t.provenance.x0 << '\n';
        }
    }
    std::ofstream(a.out / "manifest.txt") << manifest.str();
    json info{{"msi_bands", a.bands},
              {"factor", a.factor},
              {"tile", a.tile},
              {"seed", *a.seed},
              {"source", a.input.filename().string()},
              {"hsi_bands", hsi.bands},
              {"hsi_wavelengths", hsi.wavelengths}};
    std::ofstream(a.out / "dataset.json") << info.dump(2) << '\n';
    log << "simulate tiles=" << tiles.size() << " train=" << parts.train.size() << " val=" << parts.val.size()
        << " test=" << parts.test.size() << " out=" << a.out.string() << '\n';
}

Dataset load_dataset(const fs::path& dir) {
    Dataset d;
    std::ifstream info_in(dir / "dataset.json");
    if (!info_in) throw DataError("dataset not found (no dataset.json in " + dir.string() + ")");
    try {
        const json j = json::parse(info_in);
        d.info.msi_bands = j.at("msi_bands").get<std::vector<int>>();
        d.info.factor = j.at("factor").get<int>();
        d.info.tile = j.at("tile").get<int>();
        d.info.seed = j.at("seed").get<std::uint64_t>();
        d.info.hsi_bands = j.at("hsi_bands").get<int>();
        d.info.hsi_wavelengths = j.at("hsi_wavelengths").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw DataError("malformed dataset.json in " + dir.string() + ": " + e.what());
    }
    std::ifstream in(dir / "manifest.txt");
    if (!in) throw DataError("dataset manifest missing in " + dir.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string name, split_text;
        TilePair t;
        ss >> name >> split_text >> t.provenance.source_id >> t.provenance.y0 >> t.provenance.x0;
        if (!ss) throw DataError("malformed manifest line: " + line);
        t.split = parse_split(split_text);
        t.msi = load_cube(dir / "tiles" / (name + ".msi"));
        t.hsi = load_cube(dir / "tiles" / (name + ".hsi"));
        TileSet* set = t.split == Split::Train ? &d.splits.train : t.split == Split::Val ? &d.splits.val : &d.splits.test;
        set->tiles.push_back(std::move(t));
    }
    return d;
}

// ---------------------------------------------------------------------------
// bandseq
// ---------------------------------------------------------------------------

void cmd_bandseq(const BandseqArgs& a, std::ostream& out) {
    BandSequence seq;
    if (a.published) {
        seq = paper_sequence();
    } else if (!a.order.empty()) {
        seq = BandSequence::from_order(a.order);
    } else {
        if (a.bands.empty()) throw ConfigError("bandseq requires --bands, --order or --published");
        seq = build_sequence(a.bands, a.depth);
    }
    const CoverageReport cov = validate_coverage(seq);
    out << "sequence=" << format_band_list(seq.order) << '\n';
    out << "depth=" << seq.depth() << '\n';
    out << "bands=" << format_band_list(seq.bands) << '\n';
    out << "min_depth=" << min_sequence_length(static_cast<int>(seq.bands.size())) << '\n';
    out << "pairs_covered=" << cov.satisfied.size() << '/' << cov.satisfied.size() + cov.missing.size() << '\n';
    std::string missing;
    for (const auto& [x, y] : cov.missing) missing += (missing.empty() ? "" : " ") + std::to_string(x) + "-" + std::to_string(y);
    out << "missing=" << (missing.empty() ? "none" : missing) << '\n';
    out << "complete=" << (cov.complete ? "yes" : "no") << '\n';
    if (a.validate && !cov.complete) throw DataError("sequence is incomplete; missing pairs: " + missing);
}

// ---------------------------------------------------------------------------
// cascade-plan
// ---------------------------------------------------------------------------

CascadePyramid resolve_pyramid(const RunConfig& cfg) {
    if (cfg.cascade.levels.empty()) {
        if (cfg.cascade.total_bands != 224) {
            throw ConfigError("the shipped pyramids cover 224 bands; give cascade.levels for other band counts");
        }
        return pyramid_from_table(cfg.cascade.strategy);
    }
    CascadePyramid p;
    p.levels = cfg.cascade.levels;
    p.strategy = cfg.cascade.strategy;
    p.total_bands = cfg.cascade.total_bands;
    std::set<int> used;
    for (const auto& l : p.levels) used.insert(l.begin(), l.end());
    for (int b = 0; b < p.total_bands; ++b)
        if (!used.count(b)) p.finetune_bands.push_back(b);
    try {
        p.validate();
    } catch (const DataError& e) {
        throw ConfigError(std::string("cascade.levels: ") + e.what());
    }
    return p;
}

EpochSchedule resolve_schedule(const RunConfig& cfg, int levels) {
    EpochSchedule s;
    s.base_epochs = cfg.cascade.base_epochs;
    s.decay = cfg.cascade.decay;
    s.floor = cfg.cascade.floor;
    s.finetune_scale = cfg.cascade.finetune_scale;
    s.level_epochs = cascade_epoch_schedule(s.base_epochs, s.decay, s.floor, levels);
    return s;
}

void cmd_cascade_plan(const CascadePlanArgs& a, std::ostream& out) {
    const CascadePyramid pyr = resolve_pyramid(a.config);
    const EpochSchedule sch = resolve_schedule(a.config, static_cast<int>(pyr.levels.size()));
    std::vector<FinetunePlan> plan;
    const fs::path ds = a.config.dataset_dir();
    if (fs::exists(ds / "dataset.json")) {
        const Dataset d = load_dataset(ds);
        plan = plan_finetune(pyr, d.splits.train, sch.finetune_scale);
    }
    const json j = plan_json(pyr, sch, plan);
    if (a.out.empty()) {
        out << j.dump(2) << '\n';
        return;
    }
    if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
    std::ofstream f(a.out);
    if (!f) throw DataError("cannot write " + a.out.string());
    f << j.dump(2) << '\n';
    out << "plan strategy=" << strategy_name(pyr.strategy) << " levels=" << pyr.levels.size()
        << " cascade_bands=" << pyr.cascade_bands().size() << " finetune_bands=" << pyr.finetune_bands.size()
        << " out=" << a.out.string() << '\n';
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

CascadeResult cmd_train(const TrainArgs& a, std::ostream& log) {
    const RunConfig& cfg = a.config;
    cfg.validate();
    if (!cfg.seed) throw ConfigError("train requires a seed (config 'seed' or --seed)");
    const CascadePyramid pyr = resolve_pyramid(cfg);
    const int K = static_cast<int>(pyr.levels.size());
    if (a.stop_after_level < -1 || a.stop_after_level >= K) {
        throw ConfigError("--stop-after-level must lie in [0, " + std::to_string(K - 1) + "]");
    }
    const Dataset data = load_dataset(cfg.dataset_dir());
    if (data.info.hsi_bands != pyr.total_bands) {
        throw ConfigError("pyramid covers " + std::to_string(pyr.total_bands) + " bands but the dataset has " +
                          std::to_string(data.info.hsi_bands));
    }
    if (data.splits.train.empty()) throw DataError("dataset has no training tiles");
    if (cfg.model.input.height != data.info.tile || cfg.model.input.width != data.info.tile) {
        throw ConfigError("model input " + std::to_string(cfg.model.input.height) + "x" +
                          std::to_string(cfg.model.input.width) + " does not match the dataset tile size " +
                          std::to_string(data.info.tile));
    }
    const BandSequence seq = resolve_sequence(cfg, data.info.msi_bands);
    const EpochSchedule sch = resolve_schedule(cfg, K);

    CascadeOptions opt;
    opt.model = cfg.model;
    opt.sequence = seq;
    opt.train.batch_size = cfg.train.batch_size;
    opt.train.lr = cfg.train.lr;
    opt.train.lr_min = cfg.train.lr_min;
    opt.train.sqrt_loss = cfg.train.sqrt_loss;
    opt.train.augment = cfg.train.augment;
    opt.train.seed = *cfg.seed;
    opt.out_dir = cfg.checkpoint_root;
    opt.resume = cfg.train.resume;
    opt.stop_after_level = a.stop_after_level;

    fs::create_directories(cfg.checkpoint_root);
    std::ofstream train_log(cfg.checkpoint_root / "train.log", std::ios::app);
    if (!train_log) throw DataError("cannot open " + (cfg.checkpoint_root / "train.log").string());
    auto emit = [&](const std::string& line) {
        train_log << line << '\n';
        train_log.flush();
        log << line << '\n';
    };
    emit("start strategy=" + std::string(strategy_name(pyr.strategy)) + " levels=" + std::to_string(K) +
         " seed=" + std::to_string(*cfg.seed) + " sequence=" + format_band_list(seq.order));
    opt.on_epoch = [&](const std::string& stage, int epoch, double loss) {
        std::ostringstream ss;
        ss << "epoch stage=" << stage << " epoch=" << epoch << " loss=" << std::setprecision(9) << std::scientific << loss;
        emit(ss.str());
    };
    CascadeResult r = run_cascade(pyr, sch, opt, data.splits);
    int bands = 0;
    for (const auto& rec : r.lineage)
        if (rec.kind == LineageRecord::Kind::Band) ++bands;
    emit(std::string(r.completed ? "done" : "stopped") + " band_checkpoints=" + std::to_string(bands) +
         " lineage=" + (cfg.checkpoint_root / "lineage.txt").string());
    return r;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

SpectralCube cmd_generate(const GenerateArgs& a, std::ostream& log) {
    if (a.input.empty()) throw ConfigError("generate requires --input");
    if (a.out.empty()) throw ConfigError("generate requires --out");
    if (a.weights.empty() == a.checkpoint_dir.empty()) {
        throw ConfigError("generate needs either --weights or a checkpoint directory, not both");
    }
    if (!fs::exists(a.input)) throw DataError("input cube not found: " + a.input.string());

    std::vector<fs::path> files = a.weights;
    if (!a.checkpoint_dir.empty()) {
        std::map<int, fs::path> by_band;
        for (const auto& r : read_lineage(a.checkpoint_dir / "lineage.txt")) {
            if (r.kind == LineageRecord::Kind::Band) by_band[r.id] = a.checkpoint_dir / r.checkpoint;
        }
        std::vector<int> wanted = a.bands;
        if (wanted.empty())
            for (const auto& [b, p] : by_band) wanted.push_back(b);
        for (int b : wanted) {
            auto it = by_band.find(b);
            if (it == by_band.end()) throw DataError("no checkpoint for band " + std::to_string(b));
            files.push_back(it->second);
        }
    }
    for (const auto& f : files)
        if (!fs::exists(f)) throw DataError("checkpoint not found: " + f.string());

    const SpectralCube msi = load_cube(a.input);
    std::map<int, std::pair<double, std::vector<float>>> bands;
    for (const auto& f : files) {
        const TrainedWeights w = load_checkpoint(f);
        if (w.sequence.empty()) throw DataError(f.string() + " does not record its input band sequence");
        if (w.wavelengths.empty()) throw DataError(f.string() + " does not record its output wavelengths");
        const SpecSwin3D net(w);
        const SpectralCube pred = predict_cube(net, msi, BandSequence::from_order(w.sequence), w.wavelengths, w.band_ids);
        for (int c = 0; c < pred.bands; ++c) {
            const int id = pred.band_ids[c];
            if (bands.count(id)) throw DataError("band " + std::to_string(id) + " is predicted by two checkpoints");
            bands[id] = {pred.wavelengths[c], std::vector<float>(pred.band(c).begin(), pred.band(c).end())};
        }
        log << "generate file=" << f.filename().string() << " bands=" << format_band_list(w.band_ids) << '\n';
    }
    std::vector<double> wl;
    for (const auto& [id, v] : bands) wl.push_back(v.first);
    SpectralCube out(msi.height, msi.width, wl, msi.gsd);
    int c = 0;
    for (const auto& [id, v] : bands) {
        out.band_ids[c] = id;
        std::copy(v.second.begin(), v.second.end(), out.band(c).begin());
        ++c;
    }
    out.validate();
    if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
    save_cube(out, a.out);
    log << "generate out=" << a.out.string() << " bands=" << out.bands << '\n';
    return out;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

std::pair<int, int> parse_pixel(const std::string& text) {
    const auto comma = text.find(',');
    try {
        if (comma == std::string::npos) throw std::invalid_argument("no comma");
        std::size_t used = 0;
        const int y = std::stoi(text.substr(0, comma), &used);
        const std::string rest = text.substr(comma + 1);
        std::size_t used2 = 0;
        const int x = std::stoi(rest, &used2);
        if (used != comma || used2 != rest.size()) throw std::invalid_argument("trailing text");
        return {y, x};
    } catch (const std::exception&) {
        throw ConfigError("pixel must be given as y,x (got '" + text + "')");
    }
}

void write_report(std::ostream& out, const MetricReport& r, const SpectralCube& ref) {
    out << "psnr=" << fmt(r.psnr) << '\n';
    out << "ergas=" << fmt(r.ergas) << '\n';
    out << "sam=" << fmt(r.sam) << '\n';
    out << "q=" << fmt(r.q) << '\n';
    out << "ssim=" << fmt(r.ssim) << '\n';
    out << "rmse=" << fmt(r.rmse) << '\n';
    out << "bands_evaluated=" << r.bands.size() << '\n';
    out << "sam_zero_pixels=" << r.sam_zero_pixels << '\n';
    out << "ergas_excluded_bands=" << r.ergas_excluded << '\n';
    out << "# band_id wavelength_nm psnr ergas_term q ssim\n";
    for (std::size_t i = 0; i < r.bands.size(); ++i) {
        const int ch = r.bands[i];
        out << "band " << ref.band_ids[ch] << ' ' << fmt(ref.wavelengths[ch]) << ' ' << fmt(r.band_psnr[i]) << ' '
            << fmt(r.band_ergas[i]) << ' ' << fmt(r.band_q[i]) << ' ' << fmt(r.band_ssim[i]) << '\n';
    }
}

MetricReport cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    if (a.ref.empty() || a.rec.empty()) throw ConfigError("evaluate requires --ref and --rec");
    if (!a.pixels.empty() && a.plots.empty()) throw ConfigError("--pixel needs a --plots directory");
    if (a.best_k && *a.best_k < 1) throw ConfigError("--best-k must be at least 1");
    const SpectralCube ref = load_cube(a.ref);
    const SpectralCube rec = load_cube(a.rec);
    for (const auto& [y, x] : a.pixels) {
        if (y < 0 || y >= ref.height || x < 0 || x >= ref.width) {
            throw ConfigError("pixel " + std::to_string(y) + "," + std::to_string(x) + " lies outside the " +
                              std::to_string(ref.height) + "x" + std::to_string(ref.width) + " cube");
        }
    }
    const MetricReport r = evaluate(ref, rec, a.best_k, a.ergas_ratio);

    write_report(out, r, ref);
    if (!a.report.empty()) {
        if (a.report.has_parent_path()) fs::create_directories(a.report.parent_path());
        std::ofstream f(a.report);
        if (!f) throw DataError("cannot write report " + a.report.string());
        write_report(f, r, ref);
    }
    if (!a.plots.empty()) {
        std::vector<double> wl;
        for (int ch : r.bands) wl.push_back(ref.wavelengths[ch]);
        const std::pair<const char*, const std::vector<double>*> curves[] = {
            {"psnr", &r.band_psnr}, {"ergas_term", &r.band_ergas}, {"q", &r.band_q}, {"ssim", &r.band_ssim}};
        for (const auto& [name, ys] : curves) {
            write_line_plot(a.plots / (std::string("band_") + name + ".svg"), std::string("Per-band ") + name,
                            "wavelength (nm)", name, {PlotSeries{name, wl, *ys, "#1f77b4"}});
        }
        for (const auto& [y, x] : a.pixels) {
            PlotSeries truth{"ground truth", ref.wavelengths, {}, "#222222"};
            PlotSeries pred{"prediction", ref.wavelengths, {}, "#d62728"};
            for (int b = 0; b < ref.bands; ++b) {
                truth.y.push_back(ref.at(y, x, b));
                pred.y.push_back(rec.at(y, x, b));
            }
            write_line_plot(a.plots / ("profile_y" + std::to_string(y) + "_x" + std::to_string(x) + ".svg"),
                            "Spectral profile at (" + std::to_string(y) + ", " + std::to_string(x) + ")",
                            "wavelength (nm)", "value", {truth, pred});
        }
    }
    return r;
}

}  // namespace specswin::cli
