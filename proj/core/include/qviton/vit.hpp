// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qviton/layers.hpp"

namespace qviton::vit {

struct ViTConfig {
    std::size_t image_size = 224;
    std::size_t patch_size = 14;
    std::size_t in_channels = 3;
    std::size_t d_model = 1024;
    std::size_t n_layers = 24;
    std::size_t n_heads = 16;
    std::size_t d_mlp = 4096;
    double dropout = 0.0;
    double ln_eps = 1e-6;

    /// 1024 wide, 24 blocks, 16 heads, 4096 MLP, 14x14 patches on 224x224.
    static ViTConfig paper();
    /// 64 wide, 2 blocks, 2 heads, 256 MLP, 14x14 patches on 56x56.
    static ViTConfig toy();

    [[nodiscard]] std::size_t grid() const { return image_size / patch_size; }
    [[nodiscard]] std::size_t n_patches() const { return grid() * grid(); }
    [[nodiscard]] std::size_t n_tokens() const { return n_patches() + 1; }

    /// Trainable parameters implied by the configuration (no allocation).
    [[nodiscard]] std::size_t parameter_count() const;

    void validate() const;
};

template <typename T> struct EncoderBlock {
    LayerNorm<T> ln1, ln2;
    Linear<T> query, key, value, attn_out;
    Linear<T> mlp_in, mlp_out;
};

template <typename T> class VisionTransformer {
  public:
    VisionTransformer(const ViTConfig &config, ParamStore<T> &store, const std::string &prefix,
                      Rng &rng);

    /// [B,3,S,S] -> [B, n_patches + 1, d_model]; CLS token first.
    Tensor<T> patch_embed(const Tensor<T> &images) const;

    /// Self-attention sublayer without the residual (expects normalized input).
    Tensor<T> mhsa(const EncoderBlock<T> &block, const Tensor<T> &x,
                   const RunContext &ctx) const;

    /// Pre-norm residual block: x + MHSA(LN(x)), then x + MLP(LN(x)).
    Tensor<T> encoder_block(std::size_t index, const Tensor<T> &x,
                            const RunContext &ctx) const;

    /// Token states after the final LayerNorm, [B, T, d_model].
    Tensor<T> encode(const Tensor<T> &images, const RunContext &ctx) const;

    /// Pooled context vector tanh(dense(CLS)), [B, d_model].
    Tensor<T> forward(const Tensor<T> &images, const RunContext &ctx) const;

    [[nodiscard]] const ViTConfig &config() const { return config_; }
    [[nodiscard]] const std::vector<EncoderBlock<T>> &blocks() const { return blocks_; }
    [[nodiscard]] const Conv2d<T> &projection() const { return projection_; }
    [[nodiscard]] const Tensor<T> &cls_token() const { return cls_; }
    [[nodiscard]] const Tensor<T> &positional() const { return pos_; }

  private:
    ViTConfig config_;
    Conv2d<T> projection_;
    Tensor<T> cls_; // [1, 1, D]
    Tensor<T> pos_; // [T, D]
    std::vector<EncoderBlock<T>> blocks_;
    LayerNorm<T> final_ln_;
    Linear<T> pooler_;
};

extern template class VisionTransformer<float>;
extern template class VisionTransformer<double>;

} // namespace qviton::vit
