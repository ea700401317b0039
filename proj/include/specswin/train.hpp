#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "specswin/bandseq.hpp"
#include "specswin/datapipe.hpp"
#include "specswin/model.hpp"

namespace specswin {

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    explicit Adam(std::vector<ag::Var> params, AdamParams hp = {});
    /// One update from the gradients currently held by the parameters, each scaled by `grad_scale`.
    void step(double lr, double grad_scale = 1.0);
    long steps() const noexcept { return t_; }

private:
    std::vector<ag::Var> params_;
    std::vector<Tensor> m_, v_;
    AdamParams hp_;
    long t_ = 0;
};

/// Cosine decay from `base` at step 0 towards `floor` at step `total`.
double cosine_lr(double base, double floor, long step, long total);

struct TrainOptions {
    int epochs = 1;
    int batch_size = 1;
    double lr = 1e-4;
    double lr_min = 0.0;
    bool sqrt_loss = false;
    bool augment = false;
    AugmentParams augment_params{};
    std::uint64_t seed = 0;
    std::string stage_id = "train";
    std::function<void(int epoch, double mean_loss)> on_epoch;
};

struct TrainStats {
    std::vector<double> epoch_loss;
    long steps = 0;
};

struct Sample {
    Tensor volume;  // [H, W, D, 1]
    Tensor target;  // [H, W, bands]
};

/// Target tensor [H, W, bands.size()] taken from the cube channels holding `bands`.
Tensor band_target(const SpectralCube& cube, std::span<const int> bands);

Sample make_sample(const TilePair& pair, const BandSequence& seq, std::span<const int> target_bands,
                   const VolumeSpec& spec);

/// Mini-batch Adam with cosine decay over every tile for `epochs` passes.
/// Throws TrainingDiverged(stage_id) when a loss turns non-finite.
TrainStats train(SpecSwin3D& net, const TileSet& tiles, const BandSequence& seq, std::span<const int> target_bands,
                 const TrainOptions& options);

/// Mean loss over tiles without gradient recording.
double evaluate_loss(const SpecSwin3D& net, const TileSet& tiles, const BandSequence& seq,
                     std::span<const int> target_bands, bool sqrt_loss = false);

/// Runs the model over a cube of any size at least one model tile, covering
/// the borders with edge-aligned tiles. Output carries the given metadata.
SpectralCube predict_cube(const SpecSwin3D& net, const SpectralCube& msi, const BandSequence& seq,
                          std::vector<double> wavelengths, std::vector<int> band_ids);

}  // namespace specswin
