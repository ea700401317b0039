#include <algorithm>
#include <cmath>

#include "specswin/error.hpp"
#include "specswin/model.hpp"
#include "specswin/ops.hpp"

namespace specswin {

using ag::Var;

namespace {

std::int64_t reflect_index(std::int64_t q, std::int64_t n) {
    if (n == 1) return 0;
    return q < n ? q : 2 * (n - 1) - q;
}

std::int64_t round_up(std::int64_t v, std::int64_t m) { return (v + m - 1) / m * m; }

LinearLayer make_linear(ParameterStore& store, std::mt19937_64& rng, const std::string& name, int in, int out,
                        bool bias = true) {
    LinearLayer l;
    l.weight = store.add(name + ".weight", trunc_normal({out, in}, rng));
    if (bias) l.bias = store.add(name + ".bias", Tensor::zeros({out}));
    return l;
}

NormLayer make_norm(ParameterStore& store, const std::string& name, int dim) {
    return {store.add(name + ".gamma", Tensor({dim}, 1.0)), store.add(name + ".beta", Tensor::zeros({dim}))};
}

ag::IndexList share(std::vector<std::int64_t> v) {
    return std::make_shared<const std::vector<std::int64_t>>(std::move(v));
}

void require_rank4(const Tensor& t, const char* who) {
    if (t.rank() != 4) throw ShapeError(std::string(who) + ": expected [H, W, D, C], got " + shape_str(t.shape()));
}

}  // namespace

Tensor trunc_normal(Shape shape, std::mt19937_64& rng, double sigma) {
    Tensor t(std::move(shape));
    std::normal_distribution<double> nd(0.0, sigma);
    for (std::int64_t i = 0; i < t.size(); ++i) {
        double v = nd(rng);
        while (std::abs(v) > 2.0 * sigma) v = nd(rng);
        t[i] = v;
    }
    return t;
}

// ---------------------------------------------------------------------------

Var ParameterStore::add(const std::string& name, Tensor init) {
    if (index_.count(name)) throw Error("duplicate parameter name " + name);
    index_[name] = params_.size();
    params_.emplace_back(name, Var(std::move(init), true));
    return params_.back().second;
}

Var ParameterStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("unknown parameter " + name);
    return params_[it->second].second;
}

std::vector<Var> ParameterStore::vars() const {
    std::vector<Var> out;
    for (const auto& [n, v] : params_) out.push_back(v);
    return out;
}

std::int64_t ParameterStore::scalar_count() const {
    std::int64_t n = 0;
    for (const auto& [name, v] : params_) n += v.value().size();
    return n;
}

void ParameterStore::zero_grad() {
    for (auto& [n, v] : params_) v.zero_grad();
}

// ---------------------------------------------------------------------------

Var LinearLayer::operator()(const Var& x) const { return ag::linear(x, weight, bias); }

Var NormLayer::operator()(const Var& x) const { return ag::layer_norm(x, gamma, beta); }

PatchEmbed::PatchEmbed(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix,
                       std::array<int, 3> patch, int in_channels, int dim)
    : patch_(patch), in_channels_(in_channels) {
    proj_ = make_linear(store, rng, prefix + ".proj", patch[0] * patch[1] * patch[2] * in_channels, dim);
}

Var PatchEmbed::operator()(const Var& volume) const {
    const Tensor& v = volume.value();
    require_rank4(v, "patch embed");
    const std::int64_t H = v.dim(0), W = v.dim(1), D = v.dim(2), S = v.dim(3);
    if (S != in_channels_) throw ShapeError("patch embed: expected " + std::to_string(in_channels_) + " channels");
    const std::int64_t p0 = patch_[0], p1 = patch_[1], p2 = patch_[2];
    const std::int64_t h = round_up(H, p0) / p0, w = round_up(W, p1) / p1, d = round_up(D, p2) / p2;
    std::vector<std::int64_t> idx;
    idx.reserve(static_cast<std::size_t>(h * w * d * p0 * p1 * p2));
    for (std::int64_t i = 0; i < h; ++i)
        for (std::int64_t j = 0; j < w; ++j)
            for (std::int64_t k = 0; k < d; ++k)
                for (std::int64_t a = 0; a < p0; ++a)
                    for (std::int64_t b = 0; b < p1; ++b)
                        for (std::int64_t c = 0; c < p2; ++c) {
                            const std::int64_t y = reflect_index(i * p0 + a, H);
                            const std::int64_t x = reflect_index(j * p1 + b, W);
                            const std::int64_t z = reflect_index(k * p2 + c, D);
                            idx.push_back((y * W + x) * D + z);
                        }
    Var patches = ag::gather_rows(volume, S, share(std::move(idx)), {h, w, d, p0 * p1 * p2 * S});
    return proj_(patches);
}

// ---------------------------------------------------------------------------

WindowAttention3D::WindowAttention3D(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix, int dim,
                                     int heads, std::array<int, 3> window)
    : dim_(dim), heads_(heads), window_(window) {
    qkv_ = make_linear(store, rng, prefix + ".qkv", dim, 3 * dim);
    proj_ = make_linear(store, rng, prefix + ".proj", dim, dim);
    const int R = (2 * window[0] - 1) * (2 * window[1] - 1) * (2 * window[2] - 1);
    table_ = store.add(prefix + ".rel_bias", trunc_normal({heads, R}, rng));
}

std::int64_t WindowAttention3D::bias_index(std::array<int, 3> a, std::array<int, 3> b) const {
    const std::int64_t s1 = 2 * window_[1] - 1, s2 = 2 * window_[2] - 1;
    return ((a[0] - b[0] + window_[0] - 1) * s1 + (a[1] - b[1] + window_[1] - 1)) * s2 + (a[2] - b[2] + window_[2] - 1);
}

Var WindowAttention3D::operator()(const Var& x, bool shift) const {
    const Tensor& xv = x.value();
    require_rank4(xv, "window attention");
    const std::array<std::int64_t, 3> dim{xv.dim(0), xv.dim(1), xv.dim(2)};
    const std::int64_t C = xv.dim(3);
    if (C != dim_) throw ShapeError("window attention: expected " + std::to_string(dim_) + " channels");

    std::array<std::int64_t, 3> ws{}, sh{}, P{}, nw{};
    bool any_shift = false;
    for (int a = 0; a < 3; ++a) {
        ws[a] = std::min<std::int64_t>(window_[a], dim[a]);
        sh[a] = (shift && dim[a] > window_[a]) ? ws[a] / 2 : 0;
        any_shift = any_shift || sh[a] > 0;
        P[a] = round_up(dim[a], ws[a]);
        nw[a] = P[a] / ws[a];
    }
    const std::int64_t T = ws[0] * ws[1] * ws[2];
    const std::int64_t nW = nw[0] * nw[1] * nw[2];

    // Window-major token order over the padded, cyclically shifted lattice.
    std::vector<std::int64_t> fwd(static_cast<std::size_t>(nW * T));
    std::vector<std::int64_t> region;
    if (any_shift) region.resize(fwd.size());
    auto label = [&](int a, std::int64_t p) -> std::int64_t {
        if (sh[a] == 0) return 0;
        if (p < P[a] - ws[a]) return 0;
        return p < P[a] - sh[a] ? 1 : 2;
    };
    std::size_t r = 0;
    for (std::int64_t w0 = 0; w0 < nw[0]; ++w0)
        for (std::int64_t w1 = 0; w1 < nw[1]; ++w1)
            for (std::int64_t w2 = 0; w2 < nw[2]; ++w2)
                for (std::int64_t t0 = 0; t0 < ws[0]; ++t0)
                    for (std::int64_t t1 = 0; t1 < ws[1]; ++t1)
                        for (std::int64_t t2 = 0; t2 < ws[2]; ++t2, ++r) {
                            const std::array<std::int64_t, 3> p{w0 * ws[0] + t0, w1 * ws[1] + t1, w2 * ws[2] + t2};
                            std::array<std::int64_t, 3> s{};
                            for (int a = 0; a < 3; ++a) s[a] = reflect_index((p[a] + sh[a]) % P[a], dim[a]);
                            fwd[r] = (s[0] * dim[1] + s[1]) * dim[2] + s[2];
                            if (any_shift) region[r] = (label(0, p[0]) * 3 + label(1, p[1])) * 3 + label(2, p[2]);
                        }

    std::vector<std::int64_t> back(static_cast<std::size_t>(dim[0] * dim[1] * dim[2]));
    r = 0;
    for (std::int64_t y = 0; y < dim[0]; ++y)
        for (std::int64_t xx = 0; xx < dim[1]; ++xx)
            for (std::int64_t z = 0; z < dim[2]; ++z, ++r) {
                const std::array<std::int64_t, 3> s{y, xx, z};
                std::array<std::int64_t, 3> p{};
                for (int a = 0; a < 3; ++a) p[a] = ((s[a] - sh[a]) % P[a] + P[a]) % P[a];
                const std::int64_t win = ((p[0] / ws[0]) * nw[1] + p[1] / ws[1]) * nw[2] + p[2] / ws[2];
                const std::int64_t tok = ((p[0] % ws[0]) * ws[1] + p[1] % ws[1]) * ws[2] + p[2] % ws[2];
                back[r] = win * T + tok;
            }

    const std::int64_t R = table_.value().dim(1);
    std::vector<std::int64_t> bidx(static_cast<std::size_t>(heads_ * T * T));
    std::vector<std::array<int, 3>> coord(static_cast<std::size_t>(T));
    for (std::int64_t t = 0; t < T; ++t) {
        coord[t] = {static_cast<int>(t / (ws[1] * ws[2])), static_cast<int>((t / ws[2]) % ws[1]),
                    static_cast<int>(t % ws[2])};
    }
    for (std::int64_t h = 0; h < heads_; ++h)
        for (std::int64_t i = 0; i < T; ++i)
            for (std::int64_t j = 0; j < T; ++j) bidx[(h * T + i) * T + j] = h * R + bias_index(coord[i], coord[j]);

    Var tokens = ag::gather_rows(x, C, share(std::move(fwd)), {nW * T, C});
    Var bias = ag::gather_rows(table_, 1, share(std::move(bidx)), {heads_, T, T});
    Var att = ag::window_attention_core(qkv_(tokens), bias, any_shift ? share(std::move(region)) : nullptr, nW, T,
                                        heads_);
    return ag::gather_rows(proj_(att), C, share(std::move(back)), xv.shape());
}

SwinBlock3D::SwinBlock3D(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix, int dim, int heads,
                         std::array<int, 3> window, double mlp_ratio, bool shift)
    : shift_(shift) {
    norm1_ = make_norm(store, prefix + ".norm1", dim);
    attn_ = WindowAttention3D(store, rng, prefix + ".attn", dim, heads, window);
    norm2_ = make_norm(store, prefix + ".norm2", dim);
    const int hidden = std::max(1, static_cast<int>(std::lround(dim * mlp_ratio)));
    fc1_ = make_linear(store, rng, prefix + ".fc1", dim, hidden);
    fc2_ = make_linear(store, rng, prefix + ".fc2", hidden, dim);
}

Var SwinBlock3D::operator()(const Var& x) const {
    Var h = ag::add(x, attn_(norm1_(x), shift_));
    return ag::add(h, fc2_(ag::gelu(fc1_(norm2_(h)))));
}

PatchMerging::PatchMerging(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix, int dim) {
    norm_ = make_norm(store, prefix + ".norm", 4 * dim);
    reduce_ = make_linear(store, rng, prefix + ".reduce", 4 * dim, 2 * dim, false);
}

Var PatchMerging::operator()(const Var& x) const {
    const Tensor& xv = x.value();
    require_rank4(xv, "patch merging");
    const std::int64_t H = xv.dim(0), W = xv.dim(1), D = xv.dim(2), C = xv.dim(3);
    if (H % 2 != 0 || W % 2 != 0) {
        throw ShapeError("patch merging: spatial dims " + std::to_string(H) + "x" + std::to_string(W) + " must be even");
    }
    static constexpr int dy[4] = {0, 1, 0, 1};
    static constexpr int dx[4] = {0, 0, 1, 1};
    std::vector<std::int64_t> idx;
    idx.reserve(static_cast<std::size_t>(H * W * D));
    for (std::int64_t i = 0; i < H / 2; ++i)
        for (std::int64_t j = 0; j < W / 2; ++j)
            for (std::int64_t k = 0; k < D; ++k)
                for (int s = 0; s < 4; ++s) idx.push_back(((2 * i + dy[s]) * W + 2 * j + dx[s]) * D + k);
    Var cat = ag::gather_rows(x, C, share(std::move(idx)), {H / 2, W / 2, D, 4 * C});
    return reduce_(norm_(cat));
}

UpShuffle::UpShuffle(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix, int in_dim, int out_dim,
                     int fh, int fw)
    : out_dim_(out_dim), fh_(fh), fw_(fw) {
    proj_ = make_linear(store, rng, prefix + ".proj", in_dim, fh * fw * out_dim);
}

Var UpShuffle::operator()(const Var& x) const {
    require_rank4(x.value(), "upsample");
    const std::int64_t H = x.value().dim(0), W = x.value().dim(1), D = x.value().dim(2);
    Var e = proj_(x);
    const std::int64_t oh = H * fh_, ow = W * fw_;
    std::vector<std::int64_t> idx(static_cast<std::size_t>(oh * ow * D));
    std::size_t r = 0;
    for (std::int64_t y = 0; y < oh; ++y)
        for (std::int64_t xx = 0; xx < ow; ++xx)
            for (std::int64_t z = 0; z < D; ++z, ++r)
                idx[r] = (((y / fh_) * W + xx / fw_) * D + z) * fh_ * fw_ + (y % fh_) * fw_ + xx % fw_;
    return ag::gather_rows(e, out_dim_, share(std::move(idx)), {oh, ow, D, out_dim_});
}

ResBlock::ResBlock(ParameterStore& store, std::mt19937_64& rng, const std::string& prefix, int in_dim, int out_dim) {
    w1_ = store.add(prefix + ".conv1.weight", trunc_normal({out_dim, 27 * in_dim}, rng));
    b1_ = store.add(prefix + ".conv1.bias", Tensor::zeros({out_dim}));
    n1_ = make_norm(store, prefix + ".norm1", out_dim);
    w2_ = store.add(prefix + ".conv2.weight", trunc_normal({out_dim, 27 * out_dim}, rng));
    b2_ = store.add(prefix + ".conv2.bias", Tensor::zeros({out_dim}));
    n2_ = make_norm(store, prefix + ".norm2", out_dim);
    skip_ = make_linear(store, rng, prefix + ".skip", in_dim, out_dim, false);
}

Var ResBlock::operator()(const Var& x) const {
    Var h = n1_(ag::conv3d_same(x, w1_, b1_, 3));
    h = n2_(ag::conv3d_same(ag::gelu(h), w2_, b2_, 3));
    return ag::gelu(ag::add(h, skip_(x)));
}

// ---------------------------------------------------------------------------

SpecSwin3D::SpecSwin3D(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    std::mt19937_64 rng(seed);
    const int S = cfg_.stages();
    const int in_ch = cfg_.input.channels;
    embed_ = PatchEmbed(store_, rng, "embed", cfg_.patch, in_ch, cfg_.embed_dim);
    blocks_.resize(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) {
        if (s > 0) merges_.emplace_back(store_, rng, "merge." + std::to_string(s), cfg_.stage_dim(s - 1));
        for (int b = 0; b < cfg_.depths[s]; ++b) {
            blocks_[s].emplace_back(store_, rng, "stage." + std::to_string(s) + ".block." + std::to_string(b),
                                    cfg_.stage_dim(s), cfg_.heads[s], cfg_.window, cfg_.mlp_ratio, b % 2 == 1);
        }
    }
    ups_.resize(static_cast<std::size_t>(S - 1));
    decoders_.resize(static_cast<std::size_t>(S - 1));
    for (int s = S - 2; s >= 0; --s) {
        ups_[s] = UpShuffle(store_, rng, "up." + std::to_string(s), cfg_.stage_dim(s + 1), cfg_.stage_dim(s), 2, 2);
        decoders_[s] = ResBlock(store_, rng, "dec." + std::to_string(s), 2 * cfg_.stage_dim(s), cfg_.stage_dim(s));
    }
    const int cf = cfg_.decoder_full_dim;
    up_full_ = UpShuffle(store_, rng, "up.full", cfg_.embed_dim, cf, cfg_.patch[0], cfg_.patch[1]);
    dec_full_ = ResBlock(store_, rng, "dec.full", cf + cfg_.patch[2] * in_ch, cf);
    const int d0 = cfg_.input.depth / cfg_.patch[2];
    head_ = make_linear(store_, rng, "head", d0 * cf + cfg_.input.depth * in_ch, cfg_.out_bands);
}

SpecSwin3D::SpecSwin3D(const TrainedWeights& weights) : SpecSwin3D(weights.config, 0) { load(weights); }

TokenGrid SpecSwin3D::embed(const Var& volume) const { return {embed_(volume), 0}; }

std::vector<TokenGrid> SpecSwin3D::encode(const Var& volume) const {
    std::vector<TokenGrid> out;
    Var x = embed_(volume);
    for (int s = 0; s < cfg_.stages(); ++s) {
        if (s > 0) x = merges_[s - 1](x);
        for (const auto& b : blocks_[s]) x = b(x);
        out.push_back({x, s});
    }
    return out;
}

Var SpecSwin3D::forward(const Var& volume) const {
    const Tensor& v = volume.value();
    const Shape expected{cfg_.input.height, cfg_.input.width, cfg_.input.depth, cfg_.input.channels};
    if (v.shape() != expected) {
        throw ShapeError("model input " + shape_str(v.shape()) + " does not match configured " + shape_str(expected));
    }
    const std::int64_t H = expected[0], W = expected[1], D = expected[2], S = expected[3];
    const std::int64_t d0 = D / cfg_.patch[2];

    const auto enc = encode(volume);
    Var d = enc.back().tokens;
    for (int s = cfg_.stages() - 2; s >= 0; --s) d = decoders_[s](ag::concat_last(ups_[s](d), enc[s].tokens));

    Var fold = ag::reshape(volume, {H, W, d0, cfg_.patch[2] * S});
    d = dec_full_(ag::concat_last(up_full_(d), fold));
    Var flat = ag::concat_last(ag::reshape(d, {H * W, d0 * cfg_.decoder_full_dim}), ag::reshape(volume, {H * W, D * S}));
    return ag::reshape(head_(flat), {H, W, cfg_.out_bands});
}

Tensor SpecSwin3D::predict(const Tensor& volume) const {
    ag::NoGradGuard guard;
    return forward(Var(volume)).value();
}

TrainedWeights SpecSwin3D::snapshot(std::vector<int> band_ids, Lineage lineage) const {
    TrainedWeights w;
    w.config = cfg_;
    for (const auto& [name, v] : store_.items()) w.params.emplace_back(name, v.value());
    if (band_ids.empty()) {
        for (int k = 0; k < cfg_.out_bands; ++k) band_ids.push_back(k);
    }
    w.band_ids = std::move(band_ids);
    w.lineage = std::move(lineage);
    w.validate();
    return w;
}

void SpecSwin3D::load(const TrainedWeights& w) {
    if (!(w.config == cfg_)) throw ConfigError("checkpoint configuration does not match the model");
    if (w.params.size() != store_.items().size()) throw DataError("checkpoint parameter count does not match the model");
    for (const auto& [name, t] : w.params) {
        if (!store_.contains(name)) throw DataError("checkpoint has unexpected parameter " + name);
        Var v = store_.get(name);
        if (v.shape() != t.shape()) {
            throw ShapeError("parameter " + name + " has shape " + shape_str(t.shape()) + ", model expects " +
                             shape_str(v.shape()));
        }
        v.mutable_value() = t;
    }
}

void SpecSwin3D::warm_start(const TrainedWeights& parent, std::span<const int> band_ids) {
    ModelConfig pc = parent.config;
    pc.out_bands = cfg_.out_bands;
    if (!(pc == cfg_)) throw ConfigError("warm start: parent architecture differs beyond the output width");
    if (static_cast<int>(band_ids.size()) != cfg_.out_bands) throw ConfigError("warm start: band id count mismatch");
    for (const auto& [name, t] : parent.params) {
        if (name == "head.weight" || name == "head.bias") continue;
        Var v = store_.get(name);
        if (v.shape() != t.shape()) throw ShapeError("warm start: shape mismatch for " + name);
        v.mutable_value() = t;
    }
    const Tensor& pw = parent.param("head.weight");
    const Tensor& pb = parent.param("head.bias");
    Var hw = store_.get("head.weight");
    Var hb = store_.get("head.bias");
    const std::int64_t F = hw.value().dim(1);
    for (std::size_t k = 0; k < band_ids.size(); ++k) {
        auto it = std::find(parent.band_ids.begin(), parent.band_ids.end(), band_ids[k]);
        if (it == parent.band_ids.end()) continue;
        const auto pk = static_cast<std::int64_t>(it - parent.band_ids.begin());
        std::copy_n(pw.data() + pk * F, F, hw.mutable_value().data() + static_cast<std::int64_t>(k) * F);
        hb.mutable_value()[static_cast<std::int64_t>(k)] = pb[pk];
    }
}

// ---------------------------------------------------------------------------

void TrainedWeights::validate() const {
    config.validate();
    if (static_cast<int>(band_ids.size()) != config.out_bands) {
        throw DataError("weights predict " + std::to_string(band_ids.size()) + " bands but out_bands is " +
                        std::to_string(config.out_bands));
    }
    if (!lineage.stage.empty() && lineage.stage == lineage.parent) throw DataError("weights list themselves as parent");
    if (!wavelengths.empty() && wavelengths.size() != band_ids.size()) {
        throw DataError("weights carry " + std::to_string(wavelengths.size()) + " wavelengths for " +
                        std::to_string(band_ids.size()) + " bands");
    }
    for (const auto& [name, t] : params) {
        if (!t.all_finite()) throw DataError("parameter " + name + " has non-finite values");
    }
}

const Tensor& TrainedWeights::param(const std::string& name) const {
    for (const auto& [n, t] : params)
        if (n == name) return t;
    throw DataError("weights have no parameter " + name);
}

TokenGrid patch_partition_embed(const Tensor& volume, const SpecSwin3D& net) { return net.embed(Var(volume)); }

TokenGrid window_attention(const TokenGrid& grid, bool shift, const WindowAttention3D& attn) {
    return {attn(grid.tokens, shift), grid.stage};
}

TokenGrid patch_merging(const TokenGrid& grid, const PatchMerging& merge) { return {merge(grid.tokens), grid.stage + 1}; }

Tensor forward(const Tensor& volume, const TrainedWeights& weights) { return SpecSwin3D(weights).predict(volume); }

Var reconstruction_loss(const Var& pred, const Tensor& target, bool root) {
    if (pred.shape() != target.shape()) {
        throw ShapeError("loss: prediction " + shape_str(pred.shape()) + " vs target " + shape_str(target.shape()));
    }
    return root ? ag::rmse_loss(pred, target) : ag::mse_loss(pred, target);
}

double reconstruction_loss(const Tensor& pred, const Tensor& target, bool root) {
    if (pred.shape() != target.shape()) {
        throw ShapeError("loss: prediction " + shape_str(pred.shape()) + " vs target " + shape_str(target.shape()));
    }
    if (pred.size() == 0) throw ShapeError("loss: empty tensors");
    double s = 0.0;
    for (std::int64_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        s += d * d;
    }
    s /= static_cast<double>(pred.size());
    return root ? std::sqrt(s) : s;
}

}  // namespace specswin
