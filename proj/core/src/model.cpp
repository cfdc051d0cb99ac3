// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/model.hpp"

#include "qviton/error.hpp"

namespace qviton::model {

std::string to_string(Mode mode) { return mode == Mode::Hybrid ? "hybrid" : "baseline"; }

Mode mode_from_string(const std::string &name) {
    if (name == "hybrid") {
        return Mode::Hybrid;
    }
    if (name == "baseline") {
        return Mode::Baseline;
    }
    throw ConfigError("unknown model mode '" + name + "' (expected hybrid or baseline)");
}

ModelConfig ModelConfig::paper() { return ModelConfig{}; }

ModelConfig ModelConfig::toy() {
    ModelConfig c;
    c.vit = vit::ViTConfig::toy();
    return c;
}

std::size_t ModelConfig::fused_width() const {
    return vit.d_model + (mode == Mode::Hybrid ? quanv.output_width() : 0);
}

void ModelConfig::validate() const {
    vit.validate();
    if (mode == Mode::Hybrid) {
        quanv.validate();
        if (quanv.in_channels != vit.in_channels) {
            throw ConfigError("model: quanv and vit disagree on input channels");
        }
    }
    if (hidden.size() != dropout.size()) {
        throw ConfigError("model: hidden widths and dropout rates differ in length");
    }
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        if (hidden[i] == 0) {
            throw ConfigError("model: hidden width must be positive");
        }
        if (!(dropout[i] >= 0.0 && dropout[i] < 1.0)) {
            throw ConfigError("model: dropout rate must lie in [0, 1)");
        }
    }
    if (n_classes < 2) {
        throw ConfigError("model: need at least two classes");
    }
}

template <typename T> Tensor<T> fuse(const Tensor<T> &quantum, const Tensor<T> &context) {
    if (quantum.rank() != 2 || context.rank() != 2 || quantum.dim(0) != context.dim(0)) {
        throw DimensionError("fuse: expected [B,q] and [B,v], got " +
                             shape_str(quantum.shape()) + " and " + shape_str(context.shape()));
    }
    return ops::concat<T>({quantum, context}, 1);
}

template <typename T>
HybridModel<T>::HybridModel(const ModelConfig &config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(seed);
    vit_.emplace(config_.vit, store_, "vit", rng);
    if (config_.mode == Mode::Hybrid) {
        quanv_.emplace(config_.quanv, store_, "quanv", rng);
    }
    std::size_t width = config_.fused_width();
    for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
        const std::string name = "classifier." + std::to_string(i);
        ClassifierStage<T> stage;
        stage.dense = Linear<T>::create(store_, name + ".dense", width, config_.hidden[i],
                                        Init::TruncatedNormal002, rng);
        stage.norm = LayerNorm<T>::create(store_, name + ".norm", config_.hidden[i]);
        stage.dropout = config_.dropout[i];
        stages_.push_back(std::move(stage));
        width = config_.hidden[i];
    }
    output_ = Linear<T>::create(store_, "classifier.out", width, config_.n_classes,
                                Init::TruncatedNormal002, rng);
}

template <typename T>
Tensor<T> HybridModel<T>::classify(const Tensor<T> &fused, const RunContext &ctx) const {
    const std::size_t expected = config_.fused_width();
    if (fused.rank() != 2 || fused.dim(1) != expected) {
        throw DimensionError("classify: expected width " + std::to_string(expected) + ", got " +
                             shape_str(fused.shape()));
    }
    Tensor<T> x = fused;
    for (const auto &stage : stages_) {
        x = ops::gelu(stage.norm(stage.dense(x)));
        if (ctx.training && stage.dropout > 0.0) {
            if (!ctx.rng) {
                throw ContractError("classify: dropout in training mode needs an RNG");
            }
            x = ops::dropout(x, stage.dropout, true, *ctx.rng);
        }
    }
    return output_(x);
}

template <typename T>
Tensor<T> HybridModel<T>::forward(const Tensor<T> &images, const RunContext &ctx) {
    auto context = vit_->forward(images, ctx);
    if (config_.mode == Mode::Baseline) {
        return classify(context, ctx);
    }
    return classify(fuse(quanv_->forward(images, ctx), context), ctx);
}

template Tensor<float> fuse(const Tensor<float> &, const Tensor<float> &);
template Tensor<double> fuse(const Tensor<double> &, const Tensor<double> &);
template class HybridModel<float>;
template class HybridModel<double>;

} // namespace qviton::model
