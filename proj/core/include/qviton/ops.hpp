// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file
 * Differentiable tensor operations. Every op records its backward rule on
 * the tape when any input requires a gradient (see tensor.hpp).
 *
 * Layout conventions: images are NCHW, token sequences are [B, T, D],
 * dense weights are stored [in, out].
 */

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qviton/random.hpp"
#include "qviton/tensor.hpp"

namespace qviton::ops {

// Elementwise, identical shapes.
template <typename T> Tensor<T> add(const Tensor<T> &a, const Tensor<T> &b);
template <typename T> Tensor<T> sub(const Tensor<T> &a, const Tensor<T> &b);
template <typename T> Tensor<T> mul(const Tensor<T> &a, const Tensor<T> &b);
template <typename T> Tensor<T> scale(const Tensor<T> &a, T factor);

/// Adds `row` ([D] or [T, D]) to every matching trailing block of `x`.
template <typename T> Tensor<T> add_broadcast(const Tensor<T> &x, const Tensor<T> &row);

template <typename T> Tensor<T> sum(const Tensor<T> &a);
template <typename T> Tensor<T> mean(const Tensor<T> &a);

/// [M, K] x [K, N] -> [M, N].
template <typename T> Tensor<T> matmul(const Tensor<T> &a, const Tensor<T> &b);

/// x[..., K] * weight[K, N] + bias[N].
template <typename T>
Tensor<T> linear(const Tensor<T> &x, const Tensor<T> &weight,
                 const std::optional<Tensor<T>> &bias);

/// Cross-correlation over NCHW input with an [F, C, k, k] kernel.
template <typename T>
Tensor<T> conv2d(const Tensor<T> &x, const Tensor<T> &kernel,
                 const std::optional<Tensor<T>> &bias, std::size_t stride,
                 std::size_t padding);

/// Output extent of a convolution; throws DimensionError when the kernel
/// does not fit the padded input.
std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride,
                               std::size_t padding);

struct BatchNormOptions {
    bool training = false;
    double momentum = 0.1;
    double eps = 1e-5;
};

/// Per-channel normalization of NCHW input. Training mode uses batch
/// statistics and updates the running buffers in place (unbiased variance);
/// eval mode uses the running buffers.
template <typename T>
Tensor<T> batch_norm2d(const Tensor<T> &x, const Tensor<T> &gamma, const Tensor<T> &beta,
                       Tensor<T> &running_mean, Tensor<T> &running_var,
                       const BatchNormOptions &options);

/// Normalizes each trailing row of width D.
template <typename T>
Tensor<T> layer_norm(const Tensor<T> &x, const Tensor<T> &gamma, const Tensor<T> &beta,
                     double eps);

/// Exact GELU, x * Phi(x).
template <typename T> Tensor<T> gelu(const Tensor<T> &x);
template <typename T> Tensor<T> sigmoid(const Tensor<T> &x);
template <typename T> Tensor<T> tanh(const Tensor<T> &x);

/// Inverted dropout. Returns `x` itself when not training or p == 0.
template <typename T> Tensor<T> dropout(const Tensor<T> &x, double p, bool training, Rng &rng);

/// Averages NCHW input over bins [floor(i*H/oh), ceil((i+1)*H/oh)).
template <typename T>
Tensor<T> adaptive_avg_pool2d(const Tensor<T> &x, std::size_t out_h, std::size_t out_w);

/// Concatenates along `axis`; all other extents must agree.
template <typename T> Tensor<T> concat(const std::vector<Tensor<T>> &parts, std::size_t axis);

/// Collapses dimensions from `start_dim` onward into one.
template <typename T> Tensor<T> flatten(const Tensor<T> &x, std::size_t start_dim);

/// [B, M, N] -> [B, N, M].
template <typename T> Tensor<T> transpose12(const Tensor<T> &x);

/// Tiles a leading-extent-1 tensor `copies` times along axis 0.
template <typename T> Tensor<T> repeat_batch(const Tensor<T> &x, std::size_t copies);

/// x[:, index, :] of a [B, T, D] tensor -> [B, D].
template <typename T> Tensor<T> select_token(const Tensor<T> &x, std::size_t index);

/// Softmax over the last axis.
template <typename T> Tensor<T> softmax(const Tensor<T> &x);

/// Mean over the batch of -log softmax(logits)[label].
template <typename T>
Tensor<T> softmax_cross_entropy(const Tensor<T> &logits, std::span<const int> labels);

/// Multi-head scaled dot-product attention over [B, T, D] projections,
/// heads taken as contiguous D / n_heads column blocks.
template <typename T>
Tensor<T> attention(const Tensor<T> &q, const Tensor<T> &k, const Tensor<T> &v,
                    std::size_t n_heads);

/// Attention probabilities [B, H, T, T] for inspection; never on the tape.
template <typename T>
std::vector<T> attention_weights(const Tensor<T> &q, const Tensor<T> &k, std::size_t n_heads);

} // namespace qviton::ops
