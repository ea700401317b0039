#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specswin/autograd.hpp"
#include "specswin/bandseq.hpp"
#include "specswin/tensor.hpp"

namespace specswin {

struct ModelConfig {
    std::array<int, 3> patch{2, 2, 2};
    int embed_dim = 48;
    std::vector<int> depths{2, 2, 2, 2};
    std::vector<int> heads{3, 6, 12, 24};
    std::array<int, 3> window{7, 7, 7};
    double mlp_ratio = 4.0;
    int out_bands = 1;
    VolumeSpec input{};
    /// Channels of the full-resolution decoder stage.
    int decoder_full_dim = 24;

    int stages() const noexcept { return static_cast<int>(depths.size()); }
    int stage_dim(int s) const noexcept { return embed_dim << s; }
    /// Token grid (H', W', D') at encoder stage s.
    std::array<int, 3> stage_grid(int s) const;
    void validate() const;

    static ModelConfig full(int out_bands = 1);
    /// Two-stage configuration small enough for gradient checks and desk runs.
    static ModelConfig toy(int height = 16, int width = 16, int out_bands = 1);

    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

bool operator==(const ModelConfig& a, const ModelConfig& b);

/// Activations on a (H', W', D') token lattice with C channels, stored as [H', W', D', C].
struct TokenGrid {
    ag::Var tokens;
    int stage = 0;

    std::int64_t height() const { return tokens.value().dim(0); }
    std::int64_t width() const { return tokens.value().dim(1); }
    std::int64_t depth() const { return tokens.value().dim(2); }
    std::int64_t channels() const { return tokens.value().dim(3); }
};

/// Named trainable tensors in registration order.
class ParameterStore {
public:
    ag::Var add(const std::string& name, Tensor init);
    ag::Var get(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) > 0; }
    const std::vector<std::pair<std::string, ag::Var>>& items() const noexcept { return params_; }
    std::vector<ag::Var> vars() const;
    std::int64_t scalar_count() const;
    void zero_grad();

private:
    std::vector<std::pair<std::string, ag::Var>> params_;
    std::map<std::string, std::size_t> index_;
};

/// Where a set of weights came from inside a cascade run.
struct Lineage {
    std::string stage;        // e.g. "level-1" or "band-57"; empty for standalone training
    std::string parent;       // stage of the weights this one was initialised from, empty for none
    int parent_band = -1;     // cascade band a fine-tune started from
};

struct TrainedWeights {
    ModelConfig config;
    std::vector<std::pair<std::string, Tensor>> params;
    std::vector<int> band_ids;  // output channel k predicts source band band_ids[k]
    Lineage lineage;
    std::vector<int> sequence;         // input band order the weights were trained with (may be empty)
    std::vector<double> wavelengths;   // nm per output band (may be empty)

    void validate() const;
    const Tensor& param(const std::string& name) const;
};

void save_checkpoint(const TrainedWeights& w, const std::filesystem::path& path);
TrainedWeights load_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

struct LinearLayer {
    ag::Var weight;  // [out, in]
    ag::Var bias;    // [out] or undefined
    ag::Var operator()(const ag::Var& x) const;
};

struct NormLayer {
    ag::Var gamma, beta;
    ag::Var operator()(const ag::Var& x) const;
};

class PatchEmbed {
public:
    PatchEmbed() = default;
    PatchEmbed(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix, std::array<int, 3> patch,
               int in_channels, int dim);
    /// volume: [H, W, D, S] -> [H/p0, W/p1, D/p2, dim]; reflection-pads to patch multiples.
    ag::Var operator()(const ag::Var& volume) const;
    const LinearLayer& proj() const { return proj_; }

private:
    std::array<int, 3> patch_{2, 2, 2};
    int in_channels_ = 1;
    LinearLayer proj_;
};

/// Multi-head self-attention within 3D windows, with optional cyclic shift.
class WindowAttention3D {
public:
    WindowAttention3D() = default;
    WindowAttention3D(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix, int dim, int heads, std::array<int, 3> window);
    /// x: [H, W, D, C]. Output has the same shape.
    ag::Var operator()(const ag::Var& x, bool shift) const;

    int heads() const { return heads_; }
    std::array<int, 3> window() const { return window_; }
    const LinearLayer& qkv() const { return qkv_; }
    const LinearLayer& proj() const { return proj_; }
    const ag::Var& bias_table() const { return table_; }  // [heads, (2w0-1)(2w1-1)(2w2-1)]
    /// Index into bias_table() for the relative offset between two in-window coordinates.
    std::int64_t bias_index(std::array<int, 3> a, std::array<int, 3> b) const;

private:
    int dim_ = 0;
    int heads_ = 1;
    std::array<int, 3> window_{7, 7, 7};
    LinearLayer qkv_, proj_;
    ag::Var table_;
};

class SwinBlock3D {
public:
    SwinBlock3D() = default;
    SwinBlock3D(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix, int dim, int heads, std::array<int, 3> window,
                double mlp_ratio, bool shift);
    ag::Var operator()(const ag::Var& x) const;
    const WindowAttention3D& attention() const { return attn_; }
    bool shifted() const { return shift_; }

private:
    NormLayer norm1_, norm2_;
    WindowAttention3D attn_;
    LinearLayer fc1_, fc2_;
    bool shift_ = false;
};

/// Concatenates 2x2 spatial neighbours (depth preserved), normalises and halves the channels.
class PatchMerging {
public:
    PatchMerging() = default;
    PatchMerging(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix, int dim);
    ag::Var operator()(const ag::Var& x) const;

private:
    NormLayer norm_;
    LinearLayer reduce_;
};

/// Per-token linear expansion followed by a pixel shuffle over H and W.
class UpShuffle {
public:
    UpShuffle() = default;
    UpShuffle(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix, int in_dim, int out_dim, int fh, int fw);
    ag::Var operator()(const ag::Var& x) const;

private:
    LinearLayer proj_;
    int out_dim_ = 0, fh_ = 2, fw_ = 2;
};

/// conv3 -> norm -> GELU -> conv3 -> norm, plus a 1x1 projection of the input, then GELU.
class ResBlock {
public:
    ResBlock() = default;
    ResBlock(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix, int in_dim, int out_dim);
    ag::Var operator()(const ag::Var& x) const;

private:
    ag::Var w1_, b1_, w2_, b2_;
    NormLayer n1_, n2_;
    LinearLayer skip_;
};

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

class SpecSwin3D {
public:
    explicit SpecSwin3D(ModelConfig cfg, std::uint64_t seed = 0);
    explicit SpecSwin3D(const TrainedWeights& weights);

    const ModelConfig& config() const noexcept { return cfg_; }
    ParameterStore& parameters() noexcept { return store_; }
    const ParameterStore& parameters() const noexcept { return store_; }

    /// volume: [H, W, D, S] matching config().input. Returns [H, W, out_bands].
    ag::Var forward(const ag::Var& volume) const;
    Tensor predict(const Tensor& volume) const;

    TokenGrid embed(const ag::Var& volume) const;
    /// Encoder outputs for every stage, shallowest first.
    std::vector<TokenGrid> encode(const ag::Var& volume) const;

    const PatchEmbed& patch_embed() const { return embed_; }
    const std::vector<SwinBlock3D>& stage_blocks(int s) const { return blocks_.at(static_cast<std::size_t>(s)); }
    const PatchMerging& merge(int s) const { return merges_.at(static_cast<std::size_t>(s - 1)); }

    TrainedWeights snapshot(std::vector<int> band_ids = {}, Lineage lineage = {}) const;
    /// Copies every parameter; names and shapes must match exactly.
    void load(const TrainedWeights& w);
    /// Copies all parameters except the head rows, which are matched by band id;
    /// rows for bands the parent never predicted keep their fresh initialisation.
    void warm_start(const TrainedWeights& parent, std::span<const int> band_ids);

private:
    ModelConfig cfg_;
    ParameterStore store_;
    PatchEmbed embed_;
    std::vector<std::vector<SwinBlock3D>> blocks_;
    std::vector<PatchMerging> merges_;
    std::vector<UpShuffle> ups_;
    std::vector<ResBlock> decoders_;
    UpShuffle up_full_;
    ResBlock dec_full_;
    LinearLayer head_;
};

/// Truncated normal (sigma 0.02, cut at two sigma) used for projection weights.
Tensor trunc_normal(Shape shape, std::mt19937_64& rng, double sigma = 0.02);

TokenGrid patch_partition_embed(const Tensor& volume, const SpecSwin3D& net);
TokenGrid window_attention(const TokenGrid& grid, bool shift, const WindowAttention3D& attn);
TokenGrid patch_merging(const TokenGrid& grid, const PatchMerging& merge);
/// Inference with published weights; returns [H, W, out_bands].
Tensor forward(const Tensor& volume, const TrainedWeights& weights);

/// Mean of squared differences; the square root of it when `root` is set.
ag::Var reconstruction_loss(const ag::Var& pred, const Tensor& target, bool root = false);
double reconstruction_loss(const Tensor& pred, const Tensor& target, bool root = false);

}  // namespace specswin
