#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "specswin/autograd.hpp"

namespace specswin::ag {

using IndexList = std::shared_ptr<const std::vector<std::int64_t>>;

/// y = x W^T + b over the last axis. x: [..., in], w: [out, in], b: [out] or undefined.
Var linear(const Var& x, const Var& w, const Var& b);

/// Normalizes over the last axis with learned affine (gamma, beta: [C]).
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

/// Exact (erf) GELU.
Var gelu(const Var& x);

Var add(const Var& a, const Var& b);

Var reshape(const Var& x, Shape shape);

/// Treats x as rows of `row_size` contiguous values and emits rows[i] for each
/// entry of `rows` (-1 emits a zero row). Covers padding, cropping, cyclic
/// shifts, window partitioning and pixel shuffles. Backward scatter-adds.
Var gather_rows(const Var& x, std::int64_t row_size, IndexList rows, Shape out_shape);

/// Concatenates along the last axis; leading dims must agree.
Var concat_last(const Var& a, const Var& b);

/// Multi-head scaled dot-product attention inside independent windows.
///
/// qkv: [windows * tokens, 3C] with q, k, v packed along the last axis.
/// bias: [heads, tokens, tokens], added to every window's logits.
/// region: optional [windows * tokens] labels; a pair attends only when its
/// labels match (shifted-window masking). Output: [windows * tokens, C].
Var window_attention_core(const Var& qkv, const Var& bias, IndexList region, std::int64_t windows,
                          std::int64_t tokens, int heads);

/// Zero-padded "same" 3D convolution with an odd cubic kernel.
/// x: [H, W, D, Cin], w: [Cout, k*k*k*Cin] (taps ordered h, w, d, then Cin), b: [Cout].
Var conv3d_same(const Var& x, const Var& w, const Var& b, int kernel);

/// Mean of squared differences over every element.
Var mse_loss(const Var& pred, const Tensor& target);

/// Square root of mse_loss.
Var rmse_loss(const Var& pred, const Tensor& target);

}  // namespace specswin::ag
