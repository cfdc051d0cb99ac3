// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file
 * Quantum feature pathway.
 *
 *   image [B,3,H,W]
 *     -> conv7/s2 + BN + GELU -> conv3/s2 + BN + GELU -> adaptive pool  [B,64,8,8]
 *     -> 1x1 channel mixer                                              [B,1,8,8]
 *     -> 2x2 patches, angle = pi * sigmoid(v)                           [B,16,4]
 *     -> <Z0> of the patch circuit                                      [B,1,4,4]
 *     -> 1x1 restore conv -> global average pool                        [B,64]
 *
 * The two stem convolutions are classical; the only quantum computation is
 * the per-patch circuit. Its gradient enters the tape through the
 * parameter-shift rule.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "qviton/layers.hpp"
#include "qviton/quantum.hpp"

namespace qviton::quanv {

struct QuanvConfig {
    std::size_t in_channels = 3;
    std::size_t stem1_channels = 32;
    std::size_t stem1_kernel = 7;
    std::size_t stem1_stride = 2;
    std::size_t stem1_padding = 3;
    std::size_t stem2_channels = 64;
    std::size_t stem2_kernel = 3;
    std::size_t stem2_stride = 2;
    std::size_t stem2_padding = 1;
    std::size_t grid = 8;  // adaptive pool target (square)
    std::size_t patch = 2; // window and stride of the patch encoder
    std::size_t circuit_layers = 2;
    std::size_t observable_qubit = 0;
    std::size_t restore_channels = 64;
    double theta_init_range = 0.1; // theta ~ U[-r, r]

    [[nodiscard]] std::size_t n_qubits() const { return patch * patch; }
    [[nodiscard]] std::size_t map_extent() const { return grid / patch; }
    [[nodiscard]] std::size_t output_width() const { return restore_channels; }
    void validate() const;
};

/// Evaluates the patch circuit; gradients are only filled when requested.
using CircuitEvaluator = std::function<quantum::CircuitGradient(
    const quantum::CircuitSpec &, std::span<const double>, bool with_gradient)>;

/// Exact statevector evaluation with parameter-shift gradients.
CircuitEvaluator statevector_evaluator();

/// Non-overlapping square windows of a [B,1,H,W] map -> [B, P, patch*patch],
/// patches and pixels within a patch both in row-major order.
template <typename T> Tensor<T> extract_patches(const Tensor<T> &map, std::size_t patch);

/// Inverse of extract_patches (not differentiable).
template <typename T>
Tensor<T> assemble_patches(const Tensor<T> &patches, std::size_t height, std::size_t width);

/// Patch extraction followed by angle = pi * sigmoid(value), in (0, pi).
template <typename T> Tensor<T> patch_encode(const Tensor<T> &map, std::size_t patch);

/// Runs one circuit per patch. `angles` is [B, P, n_qubits], `theta` the
/// trainable angles; returns <Z> arranged as [B, 1, out_h, out_w].
template <typename T>
Tensor<T> circuit_layer(const Tensor<T> &angles, const Tensor<T> &theta,
                        const quantum::CircuitSpec &layout, std::size_t out_h,
                        std::size_t out_w, const CircuitEvaluator &evaluator);

template <typename T> class QuanvBranch {
  public:
    QuanvBranch(const QuanvConfig &config, ParamStore<T> &store, const std::string &prefix,
                Rng &rng);

    /// [B,3,H,W] -> [B, stem2_channels, grid, grid]; H, W >= 16.
    Tensor<T> stem(const Tensor<T> &images, const RunContext &ctx);
    /// [B, C, g, g] -> [B, 1, g, g].
    Tensor<T> mix(const Tensor<T> &grid) const;
    /// [B, 1, g, g] -> [B, 1, g/patch, g/patch].
    Tensor<T> quantum_map(const Tensor<T> &mixed) const;
    /// [B, 1, h, w] -> [B, restore_channels].
    Tensor<T> head(const Tensor<T> &qmap) const;

    Tensor<T> forward(const Tensor<T> &images, const RunContext &ctx);

    /// Replaces the circuit backend (e.g. with a constant for isolation tests).
    void set_evaluator(CircuitEvaluator evaluator) { evaluator_ = std::move(evaluator); }

    /// Layout with the current trainable angles filled in.
    [[nodiscard]] quantum::CircuitSpec circuit_spec() const;

    [[nodiscard]] const QuanvConfig &config() const { return config_; }
    [[nodiscard]] const Conv2d<T> &mixer() const { return mixer_; }
    [[nodiscard]] const Conv2d<T> &restore() const { return restore_; }
    [[nodiscard]] const Tensor<T> &theta() const { return theta_; }

  private:
    QuanvConfig config_;
    Conv2d<T> conv1_, conv2_, mixer_, restore_;
    BatchNorm2d<T> bn1_, bn2_;
    Tensor<T> theta_;
    CircuitEvaluator evaluator_;
};

extern template class QuanvBranch<float>;
extern template class QuanvBranch<double>;

} // namespace qviton::quanv
