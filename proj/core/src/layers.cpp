// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/layers.hpp"

#include <cmath>

namespace qviton {

template <typename T>
Tensor<T> make_weight(Shape shape, std::size_t fan_in, Init init, Rng &rng) {
    Tensor<T> t(std::move(shape));
    switch (init) {
    case Init::TruncatedNormal002:
        for (T &v : t.data()) {
            v = static_cast<T>(truncated_normal(rng, 0.02));
        }
        break;
    case Init::HeNormal: {
        const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (T &v : t.data()) {
            v = static_cast<T>(standard_normal(rng) * std);
        }
        break;
    }
    case Init::Zeros:
        break;
    }
    return t;
}

template <typename T>
Linear<T> Linear<T>::create(ParamStore<T> &store, const std::string &name, std::size_t in,
                            std::size_t out, Init init, Rng &rng) {
    Linear layer;
    layer.weight = store.add_parameter(name + ".weight", make_weight<T>({in, out}, in, init, rng));
    layer.bias = store.add_parameter(name + ".bias", Tensor<T>({out}));
    return layer;
}

template <typename T>
Conv2d<T> Conv2d<T>::create(ParamStore<T> &store, const std::string &name, std::size_t in,
                            std::size_t out, std::size_t kernel, std::size_t stride,
                            std::size_t padding, Init init, Rng &rng) {
    Conv2d layer;
    layer.weight = store.add_parameter(
        name + ".weight", make_weight<T>({out, in, kernel, kernel}, in * kernel * kernel, init, rng));
    layer.bias = store.add_parameter(name + ".bias", Tensor<T>({out}));
    layer.stride = stride;
    layer.padding = padding;
    return layer;
}

template <typename T>
LayerNorm<T> LayerNorm<T>::create(ParamStore<T> &store, const std::string &name,
                                  std::size_t width, double eps) {
    LayerNorm layer;
    layer.gamma = store.add_parameter(name + ".gamma", Tensor<T>::full({width}, T{1}));
    layer.beta = store.add_parameter(name + ".beta", Tensor<T>({width}));
    layer.eps = eps;
    return layer;
}

template <typename T>
BatchNorm2d<T> BatchNorm2d<T>::create(ParamStore<T> &store, const std::string &name,
                                      std::size_t channels) {
    BatchNorm2d layer;
    layer.gamma = store.add_parameter(name + ".gamma", Tensor<T>::full({channels}, T{1}));
    layer.beta = store.add_parameter(name + ".beta", Tensor<T>({channels}));
    layer.running_mean = store.add_buffer(name + ".running_mean", Tensor<T>({channels}));
    layer.running_var =
        store.add_buffer(name + ".running_var", Tensor<T>::full({channels}, T{1}));
    return layer;
}

template Tensor<float> make_weight<float>(Shape, std::size_t, Init, Rng &);
template Tensor<double> make_weight<double>(Shape, std::size_t, Init, Rng &);
template struct Linear<float>;
template struct Linear<double>;
template struct Conv2d<float>;
template struct Conv2d<double>;
template struct LayerNorm<float>;
template struct LayerNorm<double>;
template struct BatchNorm2d<float>;
template struct BatchNorm2d<double>;

} // namespace qviton
