// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/vit.hpp"

#include "qviton/error.hpp"

namespace qviton::vit {

ViTConfig ViTConfig::paper() { return ViTConfig{}; }

ViTConfig ViTConfig::toy() {
    ViTConfig c;
    c.image_size = 56;
    c.d_model = 64;
    c.n_layers = 2;
    c.n_heads = 2;
    c.d_mlp = 256;
    return c;
}

std::size_t ViTConfig::parameter_count() const {
    const std::size_t D = d_model;
    const std::size_t embed = in_channels * patch_size * patch_size * D + D + D + n_tokens() * D;
    const std::size_t block = 2 * 2 * D             // two layer norms
                              + 4 * (D * D + D)     // q, k, v, out
                              + (D * d_mlp + d_mlp) // mlp in
                              + (d_mlp * D + D);    // mlp out
    return embed + n_layers * block + 2 * D + (D * D + D);
}

void ViTConfig::validate() const {
    if (n_heads == 0 || d_model % n_heads != 0) {
        throw ConfigError("vit: d_model " + std::to_string(d_model) +
                          " not divisible by n_heads " + std::to_string(n_heads));
    }
    if (patch_size == 0 || image_size % patch_size != 0) {
        throw ConfigError("vit: image_size " + std::to_string(image_size) +
                          " not divisible by patch_size " + std::to_string(patch_size));
    }
    if (d_mlp == 0 || n_layers == 0 || in_channels == 0) {
        throw ConfigError("vit: widths and depth must be positive");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) {
        throw ConfigError("vit: dropout must lie in [0, 1)");
    }
}

template <typename T>
VisionTransformer<T>::VisionTransformer(const ViTConfig &config, ParamStore<T> &store,
                                        const std::string &prefix, Rng &rng)
    : config_(config) {
    config_.validate();
    const std::size_t D = config_.d_model;
    const auto p = config_.patch_size;
    projection_ = Conv2d<T>::create(store, prefix + ".patch_embed", config_.in_channels, D, p, p,
                                    0, Init::TruncatedNormal002, rng);
    cls_ = store.add_parameter(prefix + ".cls_token",
                               make_weight<T>({1, 1, D}, D, Init::TruncatedNormal002, rng));
    pos_ = store.add_parameter(
        prefix + ".pos_embed",
        make_weight<T>({config_.n_tokens(), D}, D, Init::TruncatedNormal002, rng));
    blocks_.reserve(config_.n_layers);
    for (std::size_t i = 0; i < config_.n_layers; ++i) {
        const std::string name = prefix + ".blocks." + std::to_string(i);
        EncoderBlock<T> b;
        b.ln1 = LayerNorm<T>::create(store, name + ".ln1", D, config_.ln_eps);
        b.query = Linear<T>::create(store, name + ".attn.query", D, D, Init::TruncatedNormal002, rng);
        b.key = Linear<T>::create(store, name + ".attn.key", D, D, Init::TruncatedNormal002, rng);
        b.value = Linear<T>::create(store, name + ".attn.value", D, D, Init::TruncatedNormal002, rng);
        b.attn_out = Linear<T>::create(store, name + ".attn.out", D, D, Init::Zeros, rng);
        b.ln2 = LayerNorm<T>::create(store, name + ".ln2", D, config_.ln_eps);
        b.mlp_in = Linear<T>::create(store, name + ".mlp.in", D, config_.d_mlp,
                                     Init::TruncatedNormal002, rng);
        b.mlp_out = Linear<T>::create(store, name + ".mlp.out", config_.d_mlp, D, Init::Zeros, rng);
        blocks_.push_back(std::move(b));
    }
    final_ln_ = LayerNorm<T>::create(store, prefix + ".final_ln", D, config_.ln_eps);
    pooler_ = Linear<T>::create(store, prefix + ".pooler", D, D, Init::TruncatedNormal002, rng);
}

template <typename T>
Tensor<T> VisionTransformer<T>::patch_embed(const Tensor<T> &images) const {
    const auto S = config_.image_size;
    if (images.rank() != 4 || images.dim(1) != config_.in_channels || images.dim(2) != S ||
        images.dim(3) != S) {
        throw DimensionError("patch_embed: expected [B," + std::to_string(config_.in_channels) +
                             "," + std::to_string(S) + "," + std::to_string(S) + "], got " +
                             shape_str(images.shape()));
    }
    const std::size_t B = images.dim(0), D = config_.d_model;
    auto patches = projection_(images); // [B, D, g, g]
    auto tokens = ops::transpose12(patches.reshape({B, D, config_.n_patches()}));
    auto seq = ops::concat<T>({ops::repeat_batch(cls_, B), tokens}, 1);
    return ops::add_broadcast(seq, pos_);
}

template <typename T>
Tensor<T> VisionTransformer<T>::mhsa(const EncoderBlock<T> &block, const Tensor<T> &x,
                                     const RunContext &ctx) const {
    if (x.rank() != 3 || x.dim(2) != config_.d_model) {
        throw DimensionError("mhsa: token width " + shape_str(x.shape()) + " vs d_model " +
                             std::to_string(config_.d_model));
    }
    auto heads = ops::attention(block.query(x), block.key(x), block.value(x), config_.n_heads);
    Rng *rng = ctx.rng;
    if (ctx.training && config_.dropout > 0.0 && !rng) {
        throw ContractError("mhsa: dropout in training mode needs an RNG");
    }
    auto out = block.attn_out(heads);
    return config_.dropout > 0.0 ? ops::dropout(out, config_.dropout, ctx.training, *rng) : out;
}

template <typename T>
Tensor<T> VisionTransformer<T>::encoder_block(std::size_t index, const Tensor<T> &x,
                                              const RunContext &ctx) const {
    const auto &b = blocks_.at(index);
    auto h = ops::add(x, mhsa(b, b.ln1(x), ctx));
    auto m = b.mlp_out(ops::gelu(b.mlp_in(b.ln2(h))));
    if (config_.dropout > 0.0) {
        if (!ctx.rng) {
            throw ContractError("encoder_block: dropout needs an RNG");
        }
        m = ops::dropout(m, config_.dropout, ctx.training, *ctx.rng);
    }
    return ops::add(h, m);
}

template <typename T>
Tensor<T> VisionTransformer<T>::encode(const Tensor<T> &images, const RunContext &ctx) const {
    auto x = patch_embed(images);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        x = encoder_block(i, x, ctx);
    }
    return final_ln_(x);
}

template <typename T>
Tensor<T> VisionTransformer<T>::forward(const Tensor<T> &images, const RunContext &ctx) const {
    return ops::tanh(pooler_(ops::select_token(encode(images, ctx), 0)));
}

template class VisionTransformer<float>;
template class VisionTransformer<double>;

} // namespace qviton::vit
