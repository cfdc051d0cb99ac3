// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "qviton/tensor.hpp"

namespace qviton {

/// Named registry of trainable parameters and non-trainable buffers
/// (batch-norm running statistics). Iteration follows insertion order.
template <typename T> class ParamStore {
  public:
    struct Entry {
        std::string name;
        Tensor<T> tensor;
    };

    /// Registers `tensor` as trainable; throws ConfigError on a duplicate name.
    Tensor<T> add_parameter(const std::string &name, Tensor<T> tensor);
    Tensor<T> add_buffer(const std::string &name, Tensor<T> tensor);

    [[nodiscard]] const std::vector<Entry> &parameters() const { return params_; }
    [[nodiscard]] const std::vector<Entry> &buffers() const { return buffers_; }

    [[nodiscard]] bool contains(const std::string &name) const;
    /// Parameter or buffer by name; IndexError when absent.
    [[nodiscard]] Tensor<T> get(const std::string &name) const;

    /// Allocates and zero-fills every parameter gradient.
    void zero_grad();

    [[nodiscard]] std::size_t parameter_count() const;

  private:
    void check_unique(const std::string &name) const;

    std::vector<Entry> params_;
    std::vector<Entry> buffers_;
    std::unordered_map<std::string, Tensor<T>> index_;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;

} // namespace qviton
