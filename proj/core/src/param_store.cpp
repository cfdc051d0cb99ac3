// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/param_store.hpp"

#include "qviton/error.hpp"

namespace qviton {

template <typename T> void ParamStore<T>::check_unique(const std::string &name) const {
    if (index_.contains(name)) {
        throw ConfigError("duplicate parameter name '" + name + "'");
    }
}

template <typename T>
Tensor<T> ParamStore<T>::add_parameter(const std::string &name, Tensor<T> tensor) {
    check_unique(name);
    tensor.set_requires_grad(true);
    params_.push_back({name, tensor});
    index_.emplace(name, tensor);
    return tensor;
}

template <typename T>
Tensor<T> ParamStore<T>::add_buffer(const std::string &name, Tensor<T> tensor) {
    check_unique(name);
    tensor.set_requires_grad(false);
    buffers_.push_back({name, tensor});
    index_.emplace(name, tensor);
    return tensor;
}

template <typename T> bool ParamStore<T>::contains(const std::string &name) const {
    return index_.contains(name);
}

template <typename T> Tensor<T> ParamStore<T>::get(const std::string &name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw IndexError("no parameter or buffer named '" + name + "'");
    }
    return it->second;
}

template <typename T> void ParamStore<T>::zero_grad() {
    for (auto &entry : params_) {
        entry.tensor.zero_grad();
    }
}

template <typename T> std::size_t ParamStore<T>::parameter_count() const {
    std::size_t total = 0;
    for (const auto &entry : params_) {
        total += entry.tensor.numel();
    }
    return total;
}

template class ParamStore<float>;
template class ParamStore<double>;

} // namespace qviton
