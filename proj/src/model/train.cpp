#include "specswin/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "specswin/error.hpp"

namespace specswin {

Adam::Adam(std::vector<ag::Var> params, AdamParams hp) : params_(std::move(params)), hp_(hp) {
    for (const auto& p : params_) {
        m_.push_back(Tensor::zeros_like(p.value()));
        v_.push_back(Tensor::zeros_like(p.value()));
    }
}

void Adam::step(double lr, double grad_scale) {
    ++t_;
    const double c1 = 1.0 - std::pow(hp_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(hp_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i];
        if (!p.has_grad()) continue;
        const Tensor& g = p.grad();
        Tensor& w = p.mutable_value();
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (std::int64_t k = 0; k < w.size(); ++k) {
            const double gk = g[k] * grad_scale;
            m[k] = hp_.beta1 * m[k] + (1.0 - hp_.beta1) * gk;
            v[k] = hp_.beta2 * v[k] + (1.0 - hp_.beta2) * gk * gk;
            w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + hp_.eps);
        }
    }
}

double cosine_lr(double base, double floor, long step, long total) {
    if (total <= 0) return base;
    const double t = std::clamp(static_cast<double>(step) / static_cast<double>(total), 0.0, 1.0);
    return floor + 0.5 * (base - floor) * (1.0 + std::cos(std::numbers::pi * t));
}

Tensor band_target(const SpectralCube& cube, std::span<const int> bands) {
    std::vector<int> ch;
    for (int b : bands) {
        const int c = cube.channel_of(b);
        if (c < 0) throw DataError("target cube has no band " + std::to_string(b));
        ch.push_back(c);
    }
    const std::int64_t H = cube.height, W = cube.width, B = static_cast<std::int64_t>(ch.size());
    Tensor t({H, W, B});
    for (std::int64_t y = 0; y < H; ++y)
        for (std::int64_t x = 0; x < W; ++x)
            for (std::int64_t k = 0; k < B; ++k)
                t[(y * W + x) * B + k] = cube.at(static_cast<int>(y), static_cast<int>(x), ch[k]);
    return t;
}

Sample make_sample(const TilePair& pair, const BandSequence& seq, std::span<const int> target_bands,
                   const VolumeSpec& spec) {
    return {assemble_volume(pair.msi, seq, spec), band_target(pair.hsi, target_bands)};
}

TrainStats train(SpecSwin3D& net, const TileSet& tiles, const BandSequence& seq, std::span<const int> target_bands,
                 const TrainOptions& opt) {
    if (tiles.empty()) throw DataError("training set is empty");
    if (opt.epochs < 0 || opt.batch_size < 1) throw ConfigError("epochs must be >= 0 and batch size >= 1");
    if (static_cast<int>(target_bands.size()) != net.config().out_bands) {
        throw ConfigError("model predicts " + std::to_string(net.config().out_bands) + " bands but " +
                          std::to_string(target_bands.size()) + " targets were given");
    }
    if (opt.augment) opt.augment_params.validate();

    const std::size_t n = tiles.size();
    const long per_epoch = static_cast<long>((n + opt.batch_size - 1) / opt.batch_size);
    const long total = per_epoch * opt.epochs;
    Adam adam(net.parameters().vars());
    std::mt19937_64 rng(opt.seed);
    std::vector<std::size_t> order(n);
    TrainStats stats;

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(opt.batch_size)) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(opt.batch_size));
            net.parameters().zero_grad();
            for (std::size_t b = start; b < stop; ++b) {
                const TilePair& src = tiles.tiles[order[b]];
                Sample s;
                if (opt.augment) {
                    AugmentParams ap = opt.augment_params;
                    ap.seed = rng();
                    s = make_sample(augment(src, ap), seq, target_bands, net.config().input);
                } else {
                    s = make_sample(src, seq, target_bands, net.config().input);
                }
                ag::Var loss = reconstruction_loss(net.forward(ag::Var(std::move(s.volume))), s.target, opt.sqrt_loss);
                const double lv = loss.value()[0];
                if (!std::isfinite(lv)) {
                    throw TrainingDiverged(opt.stage_id, "training diverged in " + opt.stage_id + " at epoch " +
                                                             std::to_string(epoch));
                }
                ag::backward(loss);
                epoch_sum += lv;
            }
            adam.step(cosine_lr(opt.lr, opt.lr_min, stats.steps, total), 1.0 / static_cast<double>(stop - start));
            ++stats.steps;
        }
        const double mean = epoch_sum / static_cast<double>(n);
        stats.epoch_loss.push_back(mean);
        if (opt.on_epoch) opt.on_epoch(epoch, mean);
    }
    return stats;
}

double evaluate_loss(const SpecSwin3D& net, const TileSet& tiles, const BandSequence& seq,
                     std::span<const int> target_bands, bool sqrt_loss) {
    if (tiles.empty()) throw DataError("evaluation set is empty");
    double sum = 0.0;
    for (const auto& t : tiles.tiles) {
        Sample s = make_sample(t, seq, target_bands, net.config().input);
        sum += reconstruction_loss(net.predict(s.volume), s.target, sqrt_loss);
    }
    return sum / static_cast<double>(tiles.size());
}

SpectralCube predict_cube(const SpecSwin3D& net, const SpectralCube& msi, const BandSequence& seq,
                          std::vector<double> wavelengths, std::vector<int> band_ids) {
    const ModelConfig& cfg = net.config();
    const int th = cfg.input.height, tw = cfg.input.width;
    if (msi.height < th || msi.width < tw) {
        throw ShapeError("input cube " + std::to_string(msi.height) + "x" + std::to_string(msi.width) +
                         " is smaller than the model tile " + std::to_string(th) + "x" + std::to_string(tw));
    }
    if (static_cast<int>(wavelengths.size()) != cfg.out_bands || band_ids.size() != wavelengths.size()) {
        throw ConfigError("output metadata does not match the model's output width");
    }
    auto starts = [](int n, int t) {
        std::vector<int> s;
        for (int v = 0; v + t <= n; v += t) s.push_back(v);
        if (s.back() + t < n) s.push_back(n - t);
        return s;
    };
    SpectralCube out(msi.height, msi.width, std::move(wavelengths), msi.gsd);
    out.band_ids = std::move(band_ids);
    for (int y0 : starts(msi.height, th)) {
        for (int x0 : starts(msi.width, tw)) {
            SpectralCube tile(th, tw, msi.wavelengths, msi.gsd);
            tile.band_ids = msi.band_ids;
            for (int b = 0; b < msi.bands; ++b)
                for (int y = 0; y < th; ++y)
                    for (int x = 0; x < tw; ++x) tile.at(y, x, b) = msi.at(y0 + y, x0 + x, b);
            const Tensor pred = net.predict(assemble_volume(tile, seq, cfg.input));
            const int B = cfg.out_bands;
            for (int y = 0; y < th; ++y)
                for (int x = 0; x < tw; ++x)
                    for (int k = 0; k < B; ++k)
                        out.at(y0 + y, x0 + x, k) = static_cast<float>(pred[(static_cast<std::int64_t>(y) * tw + x) * B + k]);
        }
    }
    return out;
}

}  // namespace specswin
