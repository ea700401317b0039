#pragma once

// Independent reference implementations used by unit and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "specswin/autograd.hpp"
#include "specswin/cube.hpp"
#include "specswin/model.hpp"

namespace specswin::oracle {

// ---------------------------------------------------------------------------
// Attention
// ---------------------------------------------------------------------------

/// Full softmax attention over every token of x [H, W, D, C] using the layer's weights.
inline Tensor dense_attention(const WindowAttention3D& attn, const Tensor& x) {
    const std::int64_t H = x.dim(0), W = x.dim(1), D = x.dim(2), C = x.dim(3), T = H * W * D;
    const Tensor& wq = attn.qkv().weight.value();
    const Tensor& bq = attn.qkv().bias.value();
    const Tensor& wp = attn.proj().weight.value();
    const Tensor& bp = attn.proj().bias.value();
    const Tensor& table = attn.bias_table().value();
    const int heads = attn.heads();
    const std::int64_t hd = C / heads;

    std::vector<std::vector<double>> qkv(T, std::vector<double>(3 * C));
    for (std::int64_t t = 0; t < T; ++t)
        for (std::int64_t o = 0; o < 3 * C; ++o) {
            double s = bq[o];
            for (std::int64_t c = 0; c < C; ++c) s += x[t * C + c] * wq[o * C + c];
            qkv[t][o] = s;
        }
    auto coord = [&](std::int64_t t) {
        return std::array<int, 3>{static_cast<int>(t / (W * D)), static_cast<int>((t / D) % W), static_cast<int>(t % D)};
    };
    std::vector<std::vector<double>> mixed(T, std::vector<double>(C, 0.0));
    for (int h = 0; h < heads; ++h) {
        for (std::int64_t i = 0; i < T; ++i) {
            std::vector<double> logits(T);
            double mx = -INFINITY;
            for (std::int64_t j = 0; j < T; ++j) {
                double s = 0.0;
                for (std::int64_t e = 0; e < hd; ++e) s += qkv[i][h * hd + e] * qkv[j][C + h * hd + e];
                s = s / std::sqrt(static_cast<double>(hd)) + table[h * table.dim(1) + attn.bias_index(coord(i), coord(j))];
                logits[j] = s;
                mx = std::max(mx, s);
            }
            double z = 0.0;
            for (auto& l : logits) z += (l = std::exp(l - mx));
            for (std::int64_t j = 0; j < T; ++j)
                for (std::int64_t e = 0; e < hd; ++e) mixed[i][h * hd + e] += logits[j] / z * qkv[j][2 * C + h * hd + e];
        }
    }
    Tensor y(x.shape());
    for (std::int64_t t = 0; t < T; ++t)
        for (std::int64_t o = 0; o < C; ++o) {
            double s = bp[o];
            for (std::int64_t c = 0; c < C; ++c) s += mixed[t][c] * wp[o * C + c];
            y[t * C + o] = s;
        }
    return y;
}

inline double max_relative_error(const Tensor& a, const Tensor& b) {
    double num = 0.0, den = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return den > 0.0 ? num / den : num;
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check
// ---------------------------------------------------------------------------

/// Groups parameter names into the layer kinds they belong to.
inline std::string layer_type(const std::string& name) {
    auto has = [&](const char* s) { return name.find(s) != std::string::npos; };
    if (has("embed.")) return "patch_embed";
    if (has(".attn.qkv")) return "attn_qkv";
    if (has(".attn.proj")) return "attn_proj";
    if (has(".attn.rel_bias")) return "attn_rel_bias";
    if (has(".norm1") && name.rfind("stage.", 0) == 0) return "block_norm";
    if (has(".norm2") && name.rfind("stage.", 0) == 0) return "block_norm";
    if (has(".fc1") || has(".fc2")) return "mlp";
    if (name.rfind("merge.", 0) == 0) return "merge";
    if (name.rfind("up.", 0) == 0) return "upsample";
    if (name.rfind("dec.", 0) == 0 && has(".conv")) return "decoder_conv";
    if (name.rfind("dec.", 0) == 0 && has(".norm")) return "decoder_norm";
    if (name.rfind("dec.", 0) == 0 && has(".skip")) return "decoder_skip";
    if (name.rfind("head.", 0) == 0) return "head";
    return "other";
}

struct GradCheckResult {
    struct TypeStats {
        int checked = 0;
        int failed = 0;
        int near_zero = 0;
        double worst = 0.0;
    };
    std::map<std::string, TypeStats> by_type;
    bool ok() const {
        for (const auto& [t, s] : by_type)
            if (s.failed > 0) return false;
        return !by_type.empty();
    }
};

/// Compares analytic gradients with central differences on `per_type` sampled scalars per layer type.
/// A sample passes when |a - n| <= rtol * max(|a|, |n|) + atol. `worst` is the largest relative
/// error among samples whose magnitude exceeds atol / rtol; smaller ones are counted in `near_zero`.
inline GradCheckResult gradient_check(SpecSwin3D& net, const Tensor& volume, const Tensor& target, int per_type,
                                      std::uint64_t seed, double rtol = 1e-3, double atol = 1e-8, double h = 1e-5) {
    net.parameters().zero_grad();
    ag::backward(reconstruction_loss(net.forward(ag::Var(volume)), target));

    std::map<std::string, std::vector<std::pair<ag::Var, std::int64_t>>> slots;
    for (auto& [name, v] : net.parameters().items()) {
        for (std::int64_t i = 0; i < v.value().size(); ++i) slots[layer_type(name)].push_back({v, i});
    }
    std::mt19937_64 rng(seed);
    GradCheckResult out;
    for (auto& [type, all] : slots) {
        std::vector<std::size_t> pick(all.size());
        std::iota(pick.begin(), pick.end(), 0);
        std::shuffle(pick.begin(), pick.end(), rng);
        if (pick.size() > static_cast<std::size_t>(per_type)) pick.resize(static_cast<std::size_t>(per_type));
        auto& st = out.by_type[type];
        for (std::size_t k : pick) {
            auto [var, i] = all[k];
            const double analytic = var.grad()[i];
            const double old = var.value()[i];
            double lp = 0.0, lm = 0.0;
            {
                ag::NoGradGuard guard;
                var.mutable_value()[i] = old + h;
                lp = reconstruction_loss(net.forward(ag::Var(volume)).value(), target);
                var.mutable_value()[i] = old - h;
                lm = reconstruction_loss(net.forward(ag::Var(volume)).value(), target);
                var.mutable_value()[i] = old;
            }
            const double numeric = (lp - lm) / (2.0 * h);
            const double diff = std::abs(analytic - numeric);
            const double scale = std::max(std::abs(analytic), std::abs(numeric));
            ++st.checked;
            if (diff > rtol * scale + atol) ++st.failed;
            if (scale * rtol > atol)
                st.worst = std::max(st.worst, diff / scale);
            else
                ++st.near_zero;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics, written as plain loops over (y, x, b)
// ---------------------------------------------------------------------------

inline double naive_psnr(const SpectralCube& f, const SpectralCube& g) {
    double se = 0.0, peak = -INFINITY;
    for (int b = 0; b < f.bands; ++b)
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) {
                const double d = static_cast<double>(f.at(y, x, b)) - g.at(y, x, b);
                se += d * d;
                peak = std::max(peak, static_cast<double>(f.at(y, x, b)));
            }
    const double mse = se / (static_cast<double>(f.bands) * f.height * f.width);
    return mse == 0.0 ? INFINITY : 10.0 * std::log10(peak * peak / mse);
}

inline double naive_rmse(const SpectralCube& f, const SpectralCube& g) {
    double se = 0.0;
    for (int b = 0; b < f.bands; ++b)
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) {
                const double d = static_cast<double>(f.at(y, x, b)) - g.at(y, x, b);
                se += d * d;
            }
    return std::sqrt(se / (static_cast<double>(f.bands) * f.height * f.width));
}

inline double naive_ergas(const SpectralCube& f, const SpectralCube& g) {
    double acc = 0.0;
    const double n = static_cast<double>(f.height) * f.width;
    for (int b = 0; b < f.bands; ++b) {
        double se = 0.0, mu = 0.0;
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) {
                const double d = static_cast<double>(f.at(y, x, b)) - g.at(y, x, b);
                se += d * d;
                mu += f.at(y, x, b);
            }
        mu /= n;
        const double rmse_b = std::sqrt(se / n);
        acc += (rmse_b / mu) * (rmse_b / mu);
    }
    return 100.0 * std::sqrt(acc / f.bands);
}

inline double naive_sam(const SpectralCube& f, const SpectralCube& g) {
    double acc = 0.0;
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            double dot = 0.0, nf = 0.0, ng = 0.0;
            for (int b = 0; b < f.bands; ++b) {
                const double a = f.at(y, x, b), c = g.at(y, x, b);
                dot += a * c;
                nf += a * a;
                ng += c * c;
            }
            if (nf > 0.0 && ng > 0.0) acc += std::acos(std::clamp(dot / std::sqrt(nf * ng), -1.0, 1.0));
        }
    return acc / (static_cast<double>(f.height) * f.width) * 180.0 / M_PI;
}

/// Band-averaged (2 mu mu' + C1)(2 cov + C2) / ((mu^2 + mu'^2 + C1)(var + var' + C2)), L = max - min of f.
inline double naive_q(const SpectralCube& f, const SpectralCube& g) {
    double lo = INFINITY, hi = -INFINITY;
    for (float v : f.data) {
        lo = std::min(lo, static_cast<double>(v));
        hi = std::max(hi, static_cast<double>(v));
    }
    const double L = hi - lo, c1 = (0.01 * L) * (0.01 * L), c2 = (0.03 * L) * (0.03 * L);
    const double n = static_cast<double>(f.height) * f.width;
    double total = 0.0;
    for (int b = 0; b < f.bands; ++b) {
        double mf = 0, mg = 0;
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) {
                mf += f.at(y, x, b);
                mg += g.at(y, x, b);
            }
        mf /= n;
        mg /= n;
        double vf = 0, vg = 0, cv = 0;
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) {
                vf += (f.at(y, x, b) - mf) * (f.at(y, x, b) - mf);
                vg += (g.at(y, x, b) - mg) * (g.at(y, x, b) - mg);
                cv += (f.at(y, x, b) - mf) * (g.at(y, x, b) - mg);
            }
        vf /= n;
        vg /= n;
        cv /= n;
        total += (2 * mf * mg + c1) * (2 * cv + c2) / ((mf * mf + mg * mg + c1) * (vf + vg + c2));
    }
    return total / f.bands;
}

inline bool rel_close(double a, double b, double tol) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

// ---------------------------------------------------------------------------
// Importance formulas
// ---------------------------------------------------------------------------

inline double naive_variance(const std::vector<double>& v) {
    double s = 0.0, s2 = 0.0;
    for (double x : v) s += x;
    const double m = s / v.size();
    for (double x : v) s2 += (x - m) * (x - m);
    return s2 / v.size();
}

/// Textbook sum-of-products form of Pearson's r.
inline double naive_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
        sab += a[i] * b[i];
        saa += a[i] * a[i];
        sbb += b[i] * b[i];
    }
    const double den = std::sqrt(n * saa - sa * sa) * std::sqrt(n * sbb - sb * sb);
    return den > 0.0 ? (n * sab - sa * sb) / den : 0.0;
}

/// sum p(x,y) ln(p(x,y) / (p(x) p(y))) over an equal-width histogram with `bins` bins per axis.
inline double naive_mutual_information(const std::vector<double>& a, const std::vector<double>& b, int bins) {
    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
    if (*amax <= *amin || *bmax <= *bmin) return 0.0;
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> pa, pb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        int x = static_cast<int>((a[i] - *amin) / (*amax - *amin) * bins);
        int y = static_cast<int>((b[i] - *bmin) / (*bmax - *bmin) * bins);
        x = std::min(x, bins - 1);
        y = std::min(y, bins - 1);
        joint[{x, y}] += 1.0 / a.size();
        pa[x] += 1.0 / a.size();
        pb[y] += 1.0 / a.size();
    }
    double mi = 0.0;
    for (const auto& [xy, p] : joint) mi += p * std::log(p / (pa[xy.first] * pb[xy.second]));
    return mi;
}

// ---------------------------------------------------------------------------
// Band sequences
// ---------------------------------------------------------------------------

/// Fewest vertices in a walk on K_n that traverses every edge, by BFS over (vertex, covered-edge set).
inline int brute_force_min_walk(int n) {
    std::vector<std::vector<int>> edge(n, std::vector<int>(n, -1));
    int m = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) edge[a][b] = edge[b][a] = m++;
    const int full = (1 << m) - 1;
    std::vector<int> dist(static_cast<std::size_t>(n) << m, -1);
    std::deque<std::pair<int, int>> q;
    for (int v = 0; v < n; ++v) {
        dist[static_cast<std::size_t>(v) << m] = 1;
        q.push_back({v, 0});
    }
    while (!q.empty()) {
        auto [v, mask] = q.front();
        q.pop_front();
        const int d = dist[(static_cast<std::size_t>(v) << m) | mask];
        if (mask == full) return d;
        for (int u = 0; u < n; ++u) {
            if (u == v) continue;
            const int nm = mask | (1 << edge[v][u]);
            auto& slot = dist[(static_cast<std::size_t>(u) << m) | nm];
            if (slot < 0) {
                slot = d + 1;
                q.push_back({u, nm});
            }
        }
    }
    return -1;
}

}  // namespace specswin::oracle
