#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "specswin/bandseq.hpp"
#include "specswin/datapipe.hpp"
#include "specswin/model.hpp"
#include "specswin/train.hpp"

namespace specswin {

enum class Strategy { Physical, MutualInfo, Variance, SpectralPhysics, Correlation, Uniform };

const char* strategy_name(Strategy s);
Strategy parse_strategy(const std::string& name);
std::vector<Strategy> all_strategies();

inline constexpr std::array<int, 5> kLevelSizes{9, 3, 7, 3, 7};

struct CascadePyramid {
    std::vector<std::vector<int>> levels;
    std::vector<int> finetune_bands;
    Strategy strategy = Strategy::Physical;
    int total_bands = 224;

    std::vector<int> cascade_bands() const;  // ascending
    /// Levels 0..k concatenated in level order.
    std::vector<int> cumulative(int k) const;
    void validate() const;
};

/// Band groups shipped for each strategy on the 224-band sensor.
CascadePyramid pyramid_from_table(Strategy strategy);

/// Fills levels from the head of `ranking` (sizes `level_sizes`), each level sorted ascending.
CascadePyramid pyramid_from_ranking(std::span<const int> ranking, Strategy strategy, int total_bands,
                                    std::span<const int> level_sizes = kLevelSizes);

struct ImportanceScores {
    std::vector<int> band_ids;
    std::vector<double> scores;  // parallel to band_ids
    std::vector<int> ranking;    // band ids, descending score, ties by ascending id
    std::string method;
};

double pearson(std::span<const double> a, std::span<const double> b);
/// Plug-in estimate from an equal-width joint histogram, natural log.
double mutual_information(std::span<const double> a, std::span<const double> b, int bins = 64);

/// All pixels of source band `band` across the target tiles (falling back to the input tiles).
std::vector<double> band_values(const TileSet& data, int band);

ImportanceScores variance_importance(const TileSet& data);
ImportanceScores correlation_importance(const TileSet& data, std::span<const int> input_bands);
ImportanceScores mutual_info_importance(const TileSet& data, std::span<const int> input_bands, int bins = 64);
double band_similarity(const TileSet& data, int band_a, int band_b);

struct EpochSchedule {
    std::vector<int> level_epochs;
    std::map<int, int> finetune_epochs;  // band -> epochs
    int base_epochs = 80;
    double decay = 0.9;
    int floor = 40;
    /// Multiplier on fine-tune epochs for desk-scale runs (1 keeps the rule's values).
    double finetune_scale = 1.0;
};

std::vector<int> cascade_epoch_schedule(int base = 80, double decay = 0.9, int floor = 40, int levels = 5);
int finetune_epochs(double similarity, int band_distance);

struct FinetunePlan {
    int band = -1;
    int parent = -1;  // nearest cascade band, ties to the lower index
    double similarity = 0.0;
    int distance = 0;
    int epochs = 0;
};

int nearest_cascade_band(const CascadePyramid& pyramid, int band);
std::vector<FinetunePlan> plan_finetune(const CascadePyramid& pyramid, const TileSet& data, double finetune_scale = 1.0);

struct LineageRecord {
    enum class Kind { Level, Band } kind = Kind::Level;
    int id = 0;                  // level number or band id
    std::string checkpoint;      // file name relative to the manifest directory
    std::string parent;          // parent stage ("level-0", "band-12") or empty
    int parent_band = -1;
};

void write_lineage(const std::filesystem::path& path, const std::vector<LineageRecord>& records);
std::vector<LineageRecord> read_lineage(const std::filesystem::path& path);
/// Throws DataError unless every parent appears before its child and level 0 is the only root.
void validate_lineage(const std::vector<LineageRecord>& records);

struct CascadeOptions {
    ModelConfig model;  // out_bands is set per stage
    BandSequence sequence;
    TrainOptions train;
    std::filesystem::path out_dir;
    bool resume = true;
    int stop_after_level = -1;  // stop once this level is written; -1 runs everything
    std::function<void(const std::string& stage, int epoch, double loss)> on_epoch;
};

struct CascadeResult {
    std::vector<LineageRecord> lineage;
    std::vector<int> level_epochs_run;
    std::map<int, int> finetune_epochs_run;
    std::vector<FinetunePlan> finetune_plan;
    bool completed = false;
};

/// Stage 1 trains levels on cumulative band sets with warm starts; stage 2
/// fine-tunes every remaining band from its nearest cascade band. Writes
/// level-<k>.ckpt, band-<id>.ckpt and lineage.txt into options.out_dir.
CascadeResult run_cascade(const CascadePyramid& pyramid, const EpochSchedule& schedule, const CascadeOptions& options,
                          const SplitResult& data);

/// Single-output weights for `band`, sliced from a multi-band model.
TrainedWeights extract_band(const TrainedWeights& weights, int band, Lineage lineage);

}  // namespace specswin
