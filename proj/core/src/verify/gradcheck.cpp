// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/verify/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qviton/error.hpp"
#include "qviton/ops.hpp"
#include "qviton/random.hpp"

namespace qviton::verify {

double relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

GradcheckResult gradcheck(const std::string &name, const std::vector<Tensor<double>> &inputs,
                          const std::function<Tensor<double>()> &loss,
                          const GradcheckOptions &options) {
    GradcheckResult result;
    result.name = name;
    result.tolerance = options.tolerance;

    std::vector<Tensor<double>> params = inputs;
    for (auto &p : params) {
        if (!p.requires_grad()) {
            throw ContractError("gradcheck '" + name + "': input does not require a gradient");
        }
        p.zero_grad();
    }
    const Tensor<double> value = loss();
    value.backward();
    std::vector<std::vector<double>> analytic;
    for (const auto &p : params) {
        analytic.emplace_back(p.grad().begin(), p.grad().end());
    }

    Rng rng(options.seed);
    NoGradGuard no_grad;
    for (std::size_t t = 0; t < params.size(); ++t) {
        auto data = params[t].data();
        std::vector<std::size_t> coords(data.size());
        std::iota(coords.begin(), coords.end(), 0);
        if (options.max_coordinates > 0 && coords.size() > options.max_coordinates) {
            for (std::size_t i = 0; i < options.max_coordinates; ++i) {
                std::swap(coords[i], coords[i + uniform_index(rng, coords.size() - i)]);
            }
            coords.resize(options.max_coordinates);
        }
        for (std::size_t j : coords) {
            const double saved = data[j];
            data[j] = saved + options.step;
            const double up = loss().item();
            data[j] = saved - options.step;
            const double down = loss().item();
            data[j] = saved;
            const double numeric = (up - down) / (2.0 * options.step);
            const double a = analytic[t].empty() ? 0.0 : analytic[t][j];
            result.max_abs_error = std::max(result.max_abs_error, std::abs(a - numeric));
            const double rel = relative_error(a, numeric, options.floor);
            result.max_rel_error = std::isfinite(rel) ? std::max(result.max_rel_error, rel)
                                                      : INFINITY;
            ++result.coordinates;
        }
    }
    return result;
}

Tensor<double> random_tensor(const Shape &shape, std::uint64_t seed, bool requires_grad,
                             double scale) {
    Rng rng(seed);
    std::vector<double> values(shape_numel(shape));
    for (double &v : values) {
        v = scale * standard_normal(rng);
    }
    return Tensor<double>(shape, std::move(values), requires_grad);
}

Tensor<double> random_projection(const Tensor<double> &y, std::uint64_t seed) {
    return ops::sum(ops::mul(y, random_tensor(y.shape(), seed ^ 0x9e3779b97f4a7c15ULL, false)));
}

} // namespace qviton::verify
