// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qviton/tensor.hpp"

namespace qviton::verify {

struct GradcheckOptions {
    double step = 1e-5;      // central-difference half width
    double tolerance = 1e-6; // on the relative error below
    double floor = 1e-3;     // denominator floor: |a - n| / max(|a|, |n|, floor)
    std::size_t max_coordinates = 0; // per input tensor; 0 checks all
    std::uint64_t seed = 0;          // selects sampled coordinates
};

struct GradcheckResult {
    std::string name;
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t coordinates = 0;
    double tolerance = 0.0;

    [[nodiscard]] bool passed() const { return max_rel_error <= tolerance; }
};

double relative_error(double analytic, double numeric, double floor);

/// Compares backward() of `loss` against central differences with respect
/// to every tensor in `inputs`. `loss` must recompute from the inputs'
/// current values and return a scalar.
GradcheckResult gradcheck(const std::string &name, const std::vector<Tensor<double>> &inputs,
                          const std::function<Tensor<double>()> &loss,
                          const GradcheckOptions &options = {});

/// sum(y * R) with R a fixed standard-normal tensor drawn from `seed`,
/// turning any output into a scalar with generic upstream gradients.
Tensor<double> random_projection(const Tensor<double> &y, std::uint64_t seed);

/// Tensor of standard normals (optionally requiring a gradient).
Tensor<double> random_tensor(const Shape &shape, std::uint64_t seed, bool requires_grad = true,
                             double scale = 1.0);

} // namespace qviton::verify
