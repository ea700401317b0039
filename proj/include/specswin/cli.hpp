#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "specswin/cascade.hpp"
#include "specswin/datapipe.hpp"
#include "specswin/metrics.hpp"
#include "specswin/model.hpp"

namespace specswin::cli {

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct DataSection {
    std::filesystem::path root = ".";  // base for relative data paths
    std::filesystem::path source;      // hyperspectral cube for simulate
    std::filesystem::path dataset = "dataset";
    std::vector<int> msi_bands{9, 20, 30, 40, 52};
    int factor = 2;
    int tile = 128;
    int stride = 0;  // 0 means equal to tile
    SplitRatios split{};
};

struct SequenceSection {
    std::vector<int> order;  // empty: built from the input bands
    int depth = 16;          // length of the built order; the model tiles it along its depth axis
};

struct CascadeSection {
    Strategy strategy = Strategy::Physical;
    std::vector<std::vector<int>> levels;  // empty: the shipped table for `strategy`
    int total_bands = 224;
    int base_epochs = 80;
    double decay = 0.9;
    int floor = 40;
    double finetune_scale = 1.0;
};

struct TrainSection {
    int batch_size = 1;
    double lr = 1e-4;
    double lr_min = 0.0;
    bool sqrt_loss = false;
    bool augment = false;
    bool resume = true;
};

struct RunConfig {
    std::optional<std::uint64_t> seed;
    DataSection data;
    SequenceSection sequence;
    ModelConfig model;
    CascadeSection cascade;
    TrainSection train;
    std::filesystem::path checkpoint_root = "checkpoints";

    std::filesystem::path resolve_data(const std::filesystem::path& p) const;
    std::filesystem::path dataset_dir() const { return resolve_data(data.dataset); }
    /// Field-level checks that need no filesystem access.
    void validate() const;
};

/// Parses JSON text; unknown keys and ill-typed values raise ConfigError.
/// Relative `data.root` and `output.checkpoint_root` are taken relative to `base_dir`.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);
/// SPECSWIN_DATA_ROOT replaces data.root, SPECSWIN_CKPT_ROOT replaces the checkpoint root.
void apply_env_overrides(RunConfig& cfg);

// ---------------------------------------------------------------------------
// Datasets on disk
// ---------------------------------------------------------------------------

struct DatasetInfo {
    std::vector<int> msi_bands;
    int factor = 2;
    int tile = 128;
    std::uint64_t seed = 0;
    int hsi_bands = 0;
    std::vector<double> hsi_wavelengths;
};

struct Dataset {
    DatasetInfo info;
    SplitResult splits;
};

/// Reads manifest.txt, dataset.json and the tile cubes written by cmd_simulate.
Dataset load_dataset(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Commands. Each validates its inputs before writing anything and throws
// ConfigError / DataError / TrainingDiverged on failure.
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::filesystem::path input;
    std::vector<int> bands;
    int factor = 2;
    int tile = 128;
    int stride = 0;
    SplitRatios ratios{};
    std::optional<std::uint64_t> seed;
    std::filesystem::path out;
};
void cmd_simulate(const SimulateArgs& args, std::ostream& log);

struct BandseqArgs {
    std::vector<int> bands;
    int depth = 16;
    std::vector<int> order;  // validate this order instead of building one
    bool published = false;
    bool validate = false;
};
void cmd_bandseq(const BandseqArgs& args, std::ostream& out);

/// Resolved pyramid for a run: custom levels from the config or the shipped table.
CascadePyramid resolve_pyramid(const RunConfig& cfg);
EpochSchedule resolve_schedule(const RunConfig& cfg, int levels);

struct CascadePlanArgs {
    RunConfig config;
    std::filesystem::path out;  // optional JSON destination
};
void cmd_cascade_plan(const CascadePlanArgs& args, std::ostream& out);

struct TrainArgs {
    RunConfig config;
    int stop_after_level = -1;
};
CascadeResult cmd_train(const TrainArgs& args, std::ostream& log);

struct GenerateArgs {
    std::filesystem::path input;            // MSI cube
    std::filesystem::path out;
    std::vector<std::filesystem::path> weights;  // explicit checkpoints
    std::filesystem::path checkpoint_dir;   // or a lineage directory
    std::vector<int> bands;                 // requested bands (lineage mode; empty = all)
};
SpectralCube cmd_generate(const GenerateArgs& args, std::ostream& log);

struct EvaluateArgs {
    std::filesystem::path ref;
    std::filesystem::path rec;
    std::optional<int> best_k;
    double ergas_ratio = 1.0;
    std::filesystem::path report;
    std::filesystem::path plots;
    std::vector<std::pair<int, int>> pixels;  // (y, x)
};
MetricReport cmd_evaluate(const EvaluateArgs& args, std::ostream& out);

/// "64,64" -> (64, 64).
std::pair<int, int> parse_pixel(const std::string& text);

/// Key-value summary followed by a per-band table.
void write_report(std::ostream& out, const MetricReport& r, const SpectralCube& ref);

// ---------------------------------------------------------------------------
// Static plots
// ---------------------------------------------------------------------------

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
};

/// Line chart as a standalone SVG file. Non-finite points are skipped.
void write_line_plot(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace specswin::cli
