// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "qviton/ops.hpp"
#include "qviton/param_store.hpp"
#include "qviton/random.hpp"

namespace qviton {

/// Forward-pass context shared by every layer.
struct RunContext {
    bool training = false;
    Rng *rng = nullptr; // required when training with dropout
};

enum class Init {
    TruncatedNormal002, // std 0.02, clipped at two sigma
    HeNormal,           // std sqrt(2 / fan_in)
    Zeros,
};

template <typename T>
Tensor<T> make_weight(Shape shape, std::size_t fan_in, Init init, Rng &rng);

template <typename T> struct Linear {
    Tensor<T> weight; // [in, out]
    Tensor<T> bias;   // [out]

    static Linear create(ParamStore<T> &store, const std::string &name, std::size_t in,
                         std::size_t out, Init init, Rng &rng);
    Tensor<T> operator()(const Tensor<T> &x) const { return ops::linear(x, weight, {bias}); }
    [[nodiscard]] std::size_t in_features() const { return weight.dim(0); }
    [[nodiscard]] std::size_t out_features() const { return weight.dim(1); }
};

template <typename T> struct Conv2d {
    Tensor<T> weight; // [out, in, k, k]
    Tensor<T> bias;   // [out]
    std::size_t stride = 1;
    std::size_t padding = 0;

    static Conv2d create(ParamStore<T> &store, const std::string &name, std::size_t in,
                         std::size_t out, std::size_t kernel, std::size_t stride,
                         std::size_t padding, Init init, Rng &rng);
    Tensor<T> operator()(const Tensor<T> &x) const {
        return ops::conv2d(x, weight, {bias}, stride, padding);
    }
};

template <typename T> struct LayerNorm {
    Tensor<T> gamma;
    Tensor<T> beta;
    double eps = 1e-5;

    static LayerNorm create(ParamStore<T> &store, const std::string &name, std::size_t width,
                            double eps = 1e-5);
    Tensor<T> operator()(const Tensor<T> &x) const {
        return ops::layer_norm(x, gamma, beta, eps);
    }
};

template <typename T> struct BatchNorm2d {
    Tensor<T> gamma;
    Tensor<T> beta;
    Tensor<T> running_mean;
    Tensor<T> running_var;
    double momentum = 0.1;
    double eps = 1e-5;

    static BatchNorm2d create(ParamStore<T> &store, const std::string &name,
                              std::size_t channels);
    Tensor<T> operator()(const Tensor<T> &x, const RunContext &ctx) {
        return ops::batch_norm2d(x, gamma, beta, running_mean, running_var,
                                 {ctx.training, momentum, eps});
    }
};

} // namespace qviton
