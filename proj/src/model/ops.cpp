#include "specswin/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "specswin/error.hpp"

namespace specswin::ag {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using Vec = Eigen::VectorXd;

std::int64_t last_dim(const Tensor& t) { return t.rank() == 0 ? 1 : t.shape().back(); }

void require(bool cond, const std::string& msg) {
    if (!cond) throw ShapeError(msg);
}

}  // namespace

Var linear(const Var& x, const Var& w, const Var& b) {
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    require(wv.rank() == 2, "linear: weight must be 2D");
    const std::int64_t in = wv.dim(1), out = wv.dim(0);
    require(last_dim(xv) == in, "linear: input width " + std::to_string(last_dim(xv)) + " != weight width " +
                                    std::to_string(in));
    const bool has_bias = b.defined();
    if (has_bias) require(b.value().size() == out, "linear: bias size mismatch");
    const std::int64_t rows = xv.size() / in;

    Shape out_shape = xv.shape();
    out_shape.back() = out;
    Tensor y(out_shape);
    MapMat Y(y.data(), rows, out);
    CMapMat X(xv.data(), rows, in);
    CMapMat W(wv.data(), out, in);
    Y.noalias() = X * W.transpose();
    if (has_bias) {
        Eigen::Map<const Eigen::RowVectorXd> bv(b.value().data(), out);
        Y.rowwise() += bv;
    }

    std::vector<Var> inputs{x, w};
    if (has_bias) inputs.push_back(b);
    return Var::make(std::move(y), std::move(inputs), [rows, in, out, has_bias](Node& self) {
        CMapMat dY(self.grad.data(), rows, out);
        Node& xn = *self.inputs[0];
        Node& wn = *self.inputs[1];
        if (xn.requires_grad) {
            MapMat dX(xn.ensure_grad().data(), rows, in);
            dX.noalias() += dY * CMapMat(wn.value.data(), out, in);
        }
        if (wn.requires_grad) {
            MapMat dW(wn.ensure_grad().data(), out, in);
            dW.noalias() += dY.transpose() * CMapMat(xn.value.data(), rows, in);
        }
        if (has_bias && self.inputs[2]->requires_grad) {
            Eigen::Map<Eigen::RowVectorXd> db(self.inputs[2]->ensure_grad().data(), out);
            db += dY.colwise().sum();
        }
    });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
    const Tensor& xv = x.value();
    const std::int64_t c = last_dim(xv);
    require(gamma.value().size() == c && beta.value().size() == c, "layer_norm: affine size mismatch");
    const std::int64_t rows = xv.size() / c;
    Tensor y(xv.shape());
    const double* g = gamma.value().data();
    const double* bt = beta.value().data();
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* xr = xv.data() + r * c;
        double mean = 0.0;
        for (std::int64_t i = 0; i < c; ++i) mean += xr[i];
        mean /= static_cast<double>(c);
        double var = 0.0;
        for (std::int64_t i = 0; i < c; ++i) var += (xr[i] - mean) * (xr[i] - mean);
        var /= static_cast<double>(c);
        const double inv = 1.0 / std::sqrt(var + eps);
        double* yr = y.data() + r * c;
        for (std::int64_t i = 0; i < c; ++i) yr[i] = (xr[i] - mean) * inv * g[i] + bt[i];
    }
    return Var::make(std::move(y), {x, gamma, beta}, [rows, c, eps](Node& self) {
        Node& xn = *self.inputs[0];
        Node& gn = *self.inputs[1];
        Node& bn = *self.inputs[2];
        const double* g = gn.value.data();
        double* dx = xn.requires_grad ? xn.ensure_grad().data() : nullptr;
        double* dg = gn.requires_grad ? gn.ensure_grad().data() : nullptr;
        double* db = bn.requires_grad ? bn.ensure_grad().data() : nullptr;
        std::vector<double> xhat(static_cast<std::size_t>(c)), dxhat(static_cast<std::size_t>(c));
        for (std::int64_t r = 0; r < rows; ++r) {
            const double* xr = xn.value.data() + r * c;
            const double* dy = self.grad.data() + r * c;
            double mean = 0.0;
            for (std::int64_t i = 0; i < c; ++i) mean += xr[i];
            mean /= static_cast<double>(c);
            double var = 0.0;
            for (std::int64_t i = 0; i < c; ++i) var += (xr[i] - mean) * (xr[i] - mean);
            var /= static_cast<double>(c);
            const double inv = 1.0 / std::sqrt(var + eps);
            double m1 = 0.0, m2 = 0.0;
            for (std::int64_t i = 0; i < c; ++i) {
                xhat[i] = (xr[i] - mean) * inv;
                dxhat[i] = dy[i] * g[i];
                m1 += dxhat[i];
                m2 += dxhat[i] * xhat[i];
                if (dg) dg[i] += dy[i] * xhat[i];
                if (db) db[i] += dy[i];
            }
            if (dx) {
                m1 /= static_cast<double>(c);
                m2 /= static_cast<double>(c);
                double* dxr = dx + r * c;
                for (std::int64_t i = 0; i < c; ++i) dxr[i] += inv * (dxhat[i] - m1 - xhat[i] * m2);
            }
        }
    });
}

Var gelu(const Var& x) {
    const Tensor& xv = x.value();
    Tensor y(xv.shape());
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for (std::int64_t i = 0; i < xv.size(); ++i) y[i] = 0.5 * xv[i] * (1.0 + std::erf(xv[i] * inv_sqrt2));
    return Var::make(std::move(y), {x}, [](Node& self) {
        Node& xn = *self.inputs[0];
        Tensor& dx = xn.ensure_grad();
        constexpr double inv_sqrt2 = 0.70710678118654752440;
        constexpr double inv_sqrt2pi = 0.39894228040143267794;
        for (std::int64_t i = 0; i < dx.size(); ++i) {
            const double v = xn.value[i];
            const double d = 0.5 * (1.0 + std::erf(v * inv_sqrt2)) + v * inv_sqrt2pi * std::exp(-0.5 * v * v);
            dx[i] += self.grad[i] * d;
        }
    });
}

Var add(const Var& a, const Var& b) {
    require(a.shape() == b.shape(), "add: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    Tensor y = a.value();
    for (std::int64_t i = 0; i < y.size(); ++i) y[i] += b.value()[i];
    return Var::make(std::move(y), {a, b}, [](Node& self) {
        for (int k = 0; k < 2; ++k) {
            Node& in = *self.inputs[k];
            if (!in.requires_grad) continue;
            Tensor& d = in.ensure_grad();
            for (std::int64_t i = 0; i < d.size(); ++i) d[i] += self.grad[i];
        }
    });
}

Var reshape(const Var& x, Shape shape) {
    Tensor y = x.value().reshaped(std::move(shape));
    return Var::make(std::move(y), {x}, [](Node& self) {
        Tensor& d = self.inputs[0]->ensure_grad();
        for (std::int64_t i = 0; i < d.size(); ++i) d[i] += self.grad[i];
    });
}

Var gather_rows(const Var& x, std::int64_t row_size, IndexList rows, Shape out_shape) {
    const Tensor& xv = x.value();
    require(row_size > 0 && xv.size() % row_size == 0, "gather_rows: row size does not divide input");
    const std::int64_t n_in = xv.size() / row_size;
    const std::int64_t n_out = static_cast<std::int64_t>(rows->size());
    require(numel(out_shape) == n_out * row_size, "gather_rows: output shape " + shape_str(out_shape) +
                                                      " does not hold " + std::to_string(n_out) + " rows");
    Tensor y(std::move(out_shape));
    for (std::int64_t r = 0; r < n_out; ++r) {
        const std::int64_t src = (*rows)[static_cast<std::size_t>(r)];
        if (src < 0) continue;
        if (src >= n_in) throw RangeError("gather_rows: row index out of range");
        std::copy_n(xv.data() + src * row_size, row_size, y.data() + r * row_size);
    }
    return Var::make(std::move(y), {x}, [rows, row_size, n_out](Node& self) {
        Tensor& d = self.inputs[0]->ensure_grad();
        for (std::int64_t r = 0; r < n_out; ++r) {
            const std::int64_t src = (*rows)[static_cast<std::size_t>(r)];
            if (src < 0) continue;
            double* dst = d.data() + src * row_size;
            const double* g = self.grad.data() + r * row_size;
            for (std::int64_t i = 0; i < row_size; ++i) dst[i] += g[i];
        }
    });
}

Var concat_last(const Var& a, const Var& b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require(av.rank() == bv.rank() && av.rank() >= 1, "concat_last: rank mismatch");
    for (std::size_t i = 0; i + 1 < av.rank(); ++i) require(av.dim(i) == bv.dim(i), "concat_last: leading dims differ");
    const std::int64_t ca = last_dim(av), cb = last_dim(bv);
    const std::int64_t rows = av.size() / ca;
    Shape s = av.shape();
    s.back() = ca + cb;
    Tensor y(s);
    for (std::int64_t r = 0; r < rows; ++r) {
        std::copy_n(av.data() + r * ca, ca, y.data() + r * (ca + cb));
        std::copy_n(bv.data() + r * cb, cb, y.data() + r * (ca + cb) + ca);
    }
    return Var::make(std::move(y), {a, b}, [rows, ca, cb](Node& self) {
        const std::int64_t c = ca + cb;
        if (self.inputs[0]->requires_grad) {
            Tensor& d = self.inputs[0]->ensure_grad();
            for (std::int64_t r = 0; r < rows; ++r)
                for (std::int64_t i = 0; i < ca; ++i) d[r * ca + i] += self.grad[r * c + i];
        }
        if (self.inputs[1]->requires_grad) {
            Tensor& d = self.inputs[1]->ensure_grad();
            for (std::int64_t r = 0; r < rows; ++r)
                for (std::int64_t i = 0; i < cb; ++i) d[r * cb + i] += self.grad[r * c + ca + i];
        }
    });
}

Var window_attention_core(const Var& qkv, const Var& bias, IndexList region, std::int64_t windows,
                          std::int64_t tokens, int heads) {
    const Tensor& qv = qkv.value();
    require(qv.rank() == 2 && qv.dim(0) == windows * tokens && qv.dim(1) % 3 == 0,
            "window_attention_core: qkv must be [windows*tokens, 3C]");
    const std::int64_t c = qv.dim(1) / 3;
    require(heads > 0 && c % heads == 0, "window_attention_core: channels not divisible by heads");
    require(bias.value().size() == static_cast<std::int64_t>(heads) * tokens * tokens,
            "window_attention_core: bias must be [heads, tokens, tokens]");
    if (region) require(static_cast<std::int64_t>(region->size()) == windows * tokens, "window_attention_core: bad mask");
    const std::int64_t hd = c / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    const bool keep = grad_enabled() && (qkv.requires_grad() || bias.requires_grad());
    const std::int64_t row = 3 * c;

    Tensor y(Shape{windows * tokens, c});
    auto probs = std::make_shared<std::vector<double>>();
    if (keep) probs->resize(static_cast<std::size_t>(windows * heads * tokens * tokens));

#pragma omp parallel for schedule(static)
    for (std::int64_t w = 0; w < windows; ++w) {
        RowMat Q(tokens, hd), K(tokens, hd), V(tokens, hd), S(tokens, tokens);
        const double* base = qv.data() + w * tokens * row;
        for (int h = 0; h < heads; ++h) {
            for (std::int64_t t = 0; t < tokens; ++t) {
                for (std::int64_t j = 0; j < hd; ++j) {
                    Q(t, j) = base[t * row + h * hd + j];
                    K(t, j) = base[t * row + c + h * hd + j];
                    V(t, j) = base[t * row + 2 * c + h * hd + j];
                }
            }
            S.noalias() = scale * (Q * K.transpose());
            S += CMapMat(bias.value().data() + h * tokens * tokens, tokens, tokens);
            for (std::int64_t i = 0; i < tokens; ++i) {
                double mx = -std::numeric_limits<double>::infinity();
                for (std::int64_t j = 0; j < tokens; ++j) {
                    if (region && (*region)[w * tokens + i] != (*region)[w * tokens + j]) {
                        S(i, j) = -std::numeric_limits<double>::infinity();
                    }
                    mx = std::max(mx, S(i, j));
                }
                double sum = 0.0;
                for (std::int64_t j = 0; j < tokens; ++j) {
                    S(i, j) = std::exp(S(i, j) - mx);
                    sum += S(i, j);
                }
                for (std::int64_t j = 0; j < tokens; ++j) S(i, j) /= sum;
            }
            RowMat O = S * V;
            for (std::int64_t t = 0; t < tokens; ++t)
                for (std::int64_t j = 0; j < hd; ++j) y[(w * tokens + t) * c + h * hd + j] = O(t, j);
            if (keep) {
                std::copy_n(S.data(), tokens * tokens, probs->data() + (w * heads + h) * tokens * tokens);
            }
        }
    }

    return Var::make(std::move(y), {qkv, bias}, [=](Node& self) {
        Node& qn = *self.inputs[0];
        Node& bn = *self.inputs[1];
        double* dqkv = qn.requires_grad ? qn.ensure_grad().data() : nullptr;
        double* dbias = bn.requires_grad ? bn.ensure_grad().data() : nullptr;
        RowMat Q(tokens, hd), K(tokens, hd), V(tokens, hd), dO(tokens, hd), dS(tokens, tokens);
        for (std::int64_t w = 0; w < windows; ++w) {
            const double* base = qn.value.data() + w * tokens * row;
            for (int h = 0; h < heads; ++h) {
                for (std::int64_t t = 0; t < tokens; ++t) {
                    for (std::int64_t j = 0; j < hd; ++j) {
                        Q(t, j) = base[t * row + h * hd + j];
                        K(t, j) = base[t * row + c + h * hd + j];
                        V(t, j) = base[t * row + 2 * c + h * hd + j];
                        dO(t, j) = self.grad[(w * tokens + t) * c + h * hd + j];
                    }
                }
                CMapMat P(probs->data() + (w * heads + h) * tokens * tokens, tokens, tokens);
                RowMat dP = dO * V.transpose();
                for (std::int64_t i = 0; i < tokens; ++i) {
                    const double dot = P.row(i).dot(dP.row(i));
                    for (std::int64_t j = 0; j < tokens; ++j) dS(i, j) = P(i, j) * (dP(i, j) - dot);
                }
                if (dbias) MapMat(dbias + h * tokens * tokens, tokens, tokens) += dS;
                if (dqkv) {
                    RowMat dV = P.transpose() * dO;
                    RowMat dQ = scale * (dS * K);
                    RowMat dK = scale * (dS.transpose() * Q);
                    double* gbase = dqkv + w * tokens * row;
                    for (std::int64_t t = 0; t < tokens; ++t) {
                        for (std::int64_t j = 0; j < hd; ++j) {
                            gbase[t * row + h * hd + j] += dQ(t, j);
                            gbase[t * row + c + h * hd + j] += dK(t, j);
                            gbase[t * row + 2 * c + h * hd + j] += dV(t, j);
                        }
                    }
                }
            }
        }
    });
}

namespace {

// Fills the im2col block for spatial row `h`: [W*D, k^3*Cin].
void conv_columns(const Tensor& x, std::int64_t h, int kernel, RowMat& col) {
    const std::int64_t H = x.dim(0), W = x.dim(1), D = x.dim(2), C = x.dim(3);
    const int r = kernel / 2;
    col.setZero();
    for (std::int64_t w = 0; w < W; ++w) {
        for (std::int64_t d = 0; d < D; ++d) {
            double* dst = col.data() + (w * D + d) * col.cols();
            int tap = 0;
            for (int a = -r; a <= r; ++a) {
                for (int b = -r; b <= r; ++b) {
                    for (int e = -r; e <= r; ++e, ++tap) {
                        const std::int64_t hh = h + a, ww = w + b, dd = d + e;
                        if (hh < 0 || hh >= H || ww < 0 || ww >= W || dd < 0 || dd >= D) continue;
                        std::copy_n(x.data() + ((hh * W + ww) * D + dd) * C, C, dst + tap * C);
                    }
                }
            }
        }
    }
}

}  // namespace

Var conv3d_same(const Var& x, const Var& w, const Var& b, int kernel) {
    const Tensor& xv = x.value();
    require(xv.rank() == 4, "conv3d: input must be [H, W, D, C]");
    require(kernel % 2 == 1 && kernel > 0, "conv3d: kernel must be odd");
    const std::int64_t H = xv.dim(0), W = xv.dim(1), D = xv.dim(2), C = xv.dim(3);
    const std::int64_t taps = static_cast<std::int64_t>(kernel) * kernel * kernel;
    const Tensor& wv = w.value();
    require(wv.rank() == 2 && wv.dim(1) == taps * C, "conv3d: weight must be [Cout, k^3*Cin]");
    const std::int64_t cout = wv.dim(0);
    require(b.value().size() == cout, "conv3d: bias size mismatch");

    Tensor y(Shape{H, W, D, cout});
    CMapMat Wm(wv.data(), cout, taps * C);
    Eigen::Map<const Eigen::RowVectorXd> bv(b.value().data(), cout);
#pragma omp parallel
    {
        RowMat col(W * D, taps * C);
#pragma omp for schedule(static)
        for (std::int64_t h = 0; h < H; ++h) {
            conv_columns(xv, h, kernel, col);
            MapMat Y(y.data() + h * W * D * cout, W * D, cout);
            Y.noalias() = col * Wm.transpose();
            Y.rowwise() += bv;
        }
    }

    return Var::make(std::move(y), {x, w, b}, [H, W, D, C, cout, taps, kernel](Node& self) {
        Node& xn = *self.inputs[0];
        Node& wn = *self.inputs[1];
        Node& bn = *self.inputs[2];
        const int r = kernel / 2;
        RowMat col(W * D, taps * C);
        CMapMat Wm(wn.value.data(), cout, taps * C);
        for (std::int64_t h = 0; h < H; ++h) {
            CMapMat dY(self.grad.data() + h * W * D * cout, W * D, cout);
            if (bn.requires_grad) {
                Eigen::Map<Eigen::RowVectorXd>(bn.ensure_grad().data(), cout) += dY.colwise().sum();
            }
            if (wn.requires_grad) {
                conv_columns(xn.value, h, kernel, col);
                MapMat(wn.ensure_grad().data(), cout, taps * C).noalias() += dY.transpose() * col;
            }
            if (xn.requires_grad) {
                RowMat dcol = dY * Wm;
                double* dx = xn.ensure_grad().data();
                for (std::int64_t w = 0; w < W; ++w) {
                    for (std::int64_t d = 0; d < D; ++d) {
                        const double* src = dcol.data() + (w * D + d) * dcol.cols();
                        int tap = 0;
                        for (int a = -r; a <= r; ++a) {
                            for (int bb = -r; bb <= r; ++bb) {
                                for (int e = -r; e <= r; ++e, ++tap) {
                                    const std::int64_t hh = h + a, ww = w + bb, dd = d + e;
                                    if (hh < 0 || hh >= H || ww < 0 || ww >= W || dd < 0 || dd >= D) continue;
                                    double* dst = dx + ((hh * W + ww) * D + dd) * C;
                                    for (std::int64_t i = 0; i < C; ++i) dst[i] += src[tap * C + i];
                                }
                            }
                        }
                    }
                }
            }
        }
    });
}

Var mse_loss(const Var& pred, const Tensor& target) {
    require(pred.shape() == target.shape(),
            "loss: shape mismatch " + shape_str(pred.shape()) + " vs " + shape_str(target.shape()));
    const std::int64_t n = target.size();
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double d = pred.value()[i] - target[i];
        acc += d * d;
    }
    Tensor y(Shape{}, std::vector<double>{acc / static_cast<double>(n)});
    auto tgt = std::make_shared<Tensor>(target);
    return Var::make(std::move(y), {pred}, [tgt, n](Node& self) {
        Node& pn = *self.inputs[0];
        Tensor& d = pn.ensure_grad();
        const double g = self.grad[0] * 2.0 / static_cast<double>(n);
        for (std::int64_t i = 0; i < n; ++i) d[i] += g * (pn.value[i] - (*tgt)[i]);
    });
}

Var rmse_loss(const Var& pred, const Tensor& target) {
    Var m = mse_loss(pred, target);
    Tensor y(Shape{}, std::vector<double>{std::sqrt(m.value()[0])});
    return Var::make(std::move(y), {m}, [](Node& self) {
        Node& mn = *self.inputs[0];
        const double r = self.value[0];
        if (r > 0.0) mn.ensure_grad()[0] += self.grad[0] * 0.5 / r;
    });
}

}  // namespace specswin::ag
