// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qviton/quanv.hpp"
#include "qviton/vit.hpp"

namespace qviton::model {

enum class Mode {
    Hybrid,   // classify(fuse(quanv(x), vit(x)))
    Baseline, // classify(vit(x)); the quantum branch is never built
};

std::string to_string(Mode mode);
Mode mode_from_string(const std::string &name);

struct ModelConfig {
    vit::ViTConfig vit;
    quanv::QuanvConfig quanv;
    std::vector<std::size_t> hidden{512, 256};
    std::vector<double> dropout{0.5, 0.4};
    std::size_t n_classes = 2;
    Mode mode = Mode::Hybrid;

    static ModelConfig paper();
    static ModelConfig toy();

    /// Classifier input width: d_model + quantum width in hybrid mode.
    [[nodiscard]] std::size_t fused_width() const;
    void validate() const;
};

/// Concatenates [B, q] quantum features and [B, v] context vectors, quantum
/// features first.
template <typename T> Tensor<T> fuse(const Tensor<T> &quantum, const Tensor<T> &context);

template <typename T> struct ClassifierStage {
    Linear<T> dense;
    LayerNorm<T> norm;
    double dropout = 0.0;
};

template <typename T> class HybridModel {
  public:
    HybridModel(const ModelConfig &config, std::uint64_t seed);

    /// Logits [B, n_classes] for preprocessed images [B, 3, S, S].
    Tensor<T> forward(const Tensor<T> &images, const RunContext &ctx);

    /// dense -> LN -> GELU -> dropout per hidden stage, then dense to logits.
    Tensor<T> classify(const Tensor<T> &fused, const RunContext &ctx) const;

    [[nodiscard]] const ModelConfig &config() const { return config_; }
    [[nodiscard]] ParamStore<T> &params() { return store_; }
    [[nodiscard]] const ParamStore<T> &params() const { return store_; }
    [[nodiscard]] vit::VisionTransformer<T> &vit() { return *vit_; }
    /// Absent in baseline mode.
    [[nodiscard]] quanv::QuanvBranch<T> *quanv() { return quanv_ ? &*quanv_ : nullptr; }
    [[nodiscard]] const std::vector<ClassifierStage<T>> &classifier() const { return stages_; }
    [[nodiscard]] const Linear<T> &output_layer() const { return output_; }

  private:
    ModelConfig config_;
    ParamStore<T> store_;
    std::optional<vit::VisionTransformer<T>> vit_;
    std::optional<quanv::QuanvBranch<T>> quanv_;
    std::vector<ClassifierStage<T>> stages_;
    Linear<T> output_;
};

extern template class HybridModel<float>;
extern template class HybridModel<double>;

} // namespace qviton::model
