#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "specswin/bandseq.hpp"
#include "specswin/cli.hpp"
#include "specswin/error.hpp"

namespace fs = std::filesystem;
using namespace specswin;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kDiverged = 4 };

cli::RunConfig config_from(const std::string& path) {
    cli::RunConfig cfg = path.empty() ? cli::RunConfig{} : cli::load_run_config(path);
    cli::apply_env_overrides(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperspectral band reconstruction from multispectral input"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Build MSI/HSI tile pairs and split manifests from a hyperspectral cube");
    std::string sim_config, sim_input, sim_bands, sim_out;
    int sim_factor = 0, sim_tile = 0, sim_stride = -1;
    std::optional<std::uint64_t> sim_seed;
    sim->add_option("--config", sim_config, "Run configuration (JSON)");
    sim->add_option("--input", sim_input, "Source hyperspectral cube");
    sim->add_option("--bands", sim_bands, "Input band indices, e.g. 9,20,30,40,52");
    sim->add_option("--factor", sim_factor, "Spatial downsampling factor");
    sim->add_option("--tile", sim_tile, "Tile size in pixels");
    sim->add_option("--stride", sim_stride, "Tile stride (defaults to the tile size)");
    sim->add_option("--seed", sim_seed, "Split seed");
    sim->add_option("--out", sim_out, "Dataset directory");

    // bandseq
    auto* bs = app.add_subcommand("bandseq", "Build or check an input band sequence");
    std::string bs_bands, bs_order;
    cli::BandseqArgs bs_args;
    bs->add_option("--bands", bs_bands, "Bands to sequence");
    bs->add_option("--depth", bs_args.depth, "Sequence length");
    bs->add_option("--order", bs_order, "Explicit sequence to check");
    bs->add_flag("--published", bs_args.published, "Use the published 16-slice sequence");
    bs->add_flag("--validate", bs_args.validate, "Fail unless every band pair is adjacent");

    // cascade-plan
    auto* cp = app.add_subcommand("cascade-plan", "Print the cascade pyramid, epoch schedule and fine-tune plan");
    cp->alias("cascade");
    std::string cp_config, cp_strategy, cp_out;
    cp->add_option("--config", cp_config, "Run configuration (JSON)");
    cp->add_option("--strategy", cp_strategy, "Band selection strategy");
    cp->add_option("--out", cp_out, "Write the plan as JSON");

    // train
    auto* tr = app.add_subcommand("train", "Run cascade training and band fine-tuning");
    std::string tr_config, tr_strategy;
    std::optional<std::uint64_t> tr_seed;
    int tr_stop = -1;
    bool tr_fresh = false;
    tr->add_option("--config", tr_config, "Run configuration (JSON)")->required();
    tr->add_option("--seed", tr_seed, "Training seed");
    tr->add_option("--strategy", tr_strategy, "Band selection strategy");
    tr->add_option("--stop-after-level", tr_stop, "Stop once this cascade level is written");
    tr->add_flag("--no-resume", tr_fresh, "Retrain stages whose checkpoints already exist");

    // generate
    auto* gen = app.add_subcommand("generate", "Predict hyperspectral bands for an MSI cube");
    std::string gen_config, gen_input, gen_out, gen_ckpt, gen_bands;
    std::vector<std::string> gen_weights;
    gen->add_option("--weights", gen_weights, "Checkpoint file(s)");
    gen->add_option("--checkpoints", gen_ckpt, "Checkpoint directory holding lineage.txt");
    gen->add_option("--config", gen_config, "Run configuration (supplies the checkpoint directory)");
    gen->add_option("--bands", gen_bands, "Bands to generate from the checkpoint directory (default: all)");
    gen->add_option("--input", gen_input, "Input MSI cube")->required();
    gen->add_option("--out", gen_out, "Output cube")->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Compare a reconstruction with a reference cube");
    cli::EvaluateArgs ev_args;
    std::string ev_ref, ev_rec, ev_report, ev_plots;
    std::vector<std::string> ev_pixels;
    std::optional<int> ev_best_k;
    ev->add_option("--ref", ev_ref, "Reference cube")->required();
    ev->add_option("--rec", ev_rec, "Reconstructed cube")->required();
    ev->add_option("--best-k", ev_best_k, "Aggregate over the k bands with the highest PSNR");
    ev->add_option("--ergas-ratio", ev_args.ergas_ratio, "Resolution ratio multiplier for ERGAS");
    ev->add_option("--report", ev_report, "Report file");
    ev->add_option("--plots", ev_plots, "Directory for SVG plots");
    ev->add_option("--pixel", ev_pixels, "Pixel y,x for a spectral profile plot (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*sim) {
            cli::RunConfig cfg = config_from(sim_config);
            cli::SimulateArgs a;
            a.input = sim_input.empty() ? cfg.resolve_data(cfg.data.source) : fs::path(sim_input);
            a.bands = sim_bands.empty() ? cfg.data.msi_bands : parse_band_list(sim_bands);
            a.factor = sim_factor > 0 ? sim_factor : cfg.data.factor;
            a.tile = sim_tile > 0 ? sim_tile : cfg.data.tile;
            a.stride = sim_stride >= 0 ? sim_stride : cfg.data.stride;
            a.ratios = cfg.data.split;
            a.seed = sim_seed ? sim_seed : cfg.seed;
            a.out = sim_out.empty() ? cfg.dataset_dir() : fs::path(sim_out);
            cli::cmd_simulate(a, std::cout);
        } else if (*bs) {
            if (!bs_bands.empty()) bs_args.bands = parse_band_list(bs_bands);
            if (!bs_order.empty()) bs_args.order = parse_band_list(bs_order);
            cli::cmd_bandseq(bs_args, std::cout);
        } else if (*cp) {
            cli::CascadePlanArgs a;
            a.config = config_from(cp_config);
            if (!cp_strategy.empty()) a.config.cascade.strategy = parse_strategy(cp_strategy);
            a.out = cp_out;
            cli::cmd_cascade_plan(a, std::cout);
        } else if (*tr) {
            cli::TrainArgs a;
            a.config = config_from(tr_config);
            if (tr_seed) a.config.seed = tr_seed;
            if (!tr_strategy.empty()) a.config.cascade.strategy = parse_strategy(tr_strategy);
            if (tr_fresh) a.config.train.resume = false;
            a.stop_after_level = tr_stop;
            cli::cmd_train(a, std::cout);
        } else if (*gen) {
            cli::GenerateArgs a;
            a.input = gen_input;
            a.out = gen_out;
            for (const auto& w : gen_weights) a.weights.emplace_back(w);
            if (!gen_ckpt.empty()) {
                a.checkpoint_dir = gen_ckpt;
            } else if (a.weights.empty()) {
                a.checkpoint_dir = config_from(gen_config).checkpoint_root;
            }
            if (!gen_bands.empty()) a.bands = parse_band_list(gen_bands);
            cli::cmd_generate(a, std::cout);
        } else if (*ev) {
            ev_args.ref = ev_ref;
            ev_args.rec = ev_rec;
            ev_args.best_k = ev_best_k;
            ev_args.report = ev_report;
            ev_args.plots = ev_plots;
            for (const auto& p : ev_pixels) ev_args.pixels.push_back(cli::parse_pixel(p));
            cli::cmd_evaluate(ev_args, std::cout);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const TrainingDiverged& e) {
        std::cerr << "training diverged in " << e.stage() << ": " << e.what() << '\n';
        return kDiverged;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kOk;
}
