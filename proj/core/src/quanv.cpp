// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/quanv.hpp"

#include <numbers>
#include <vector>

#include "qviton/error.hpp"

namespace qviton::quanv {

void QuanvConfig::validate() const {
    if (patch == 0 || grid == 0 || grid % patch != 0) {
        throw ConfigError("quanv: grid " + std::to_string(grid) +
                          " must be divisible by patch " + std::to_string(patch));
    }
    if (in_channels == 0 || stem1_channels == 0 || stem2_channels == 0 ||
        restore_channels == 0) {
        throw ConfigError("quanv: channel counts must be positive");
    }
    if (observable_qubit >= n_qubits()) {
        throw ConfigError("quanv: observable qubit outside the patch register");
    }
}

CircuitEvaluator statevector_evaluator() {
    return [](const quantum::CircuitSpec &spec, std::span<const double> angles,
              bool with_gradient) {
        if (with_gradient) {
            return quantum::parameter_shift_grad(spec, angles);
        }
        quantum::CircuitGradient g;
        g.value = quantum::circuit_expectation(spec, angles);
        return g;
    };
}

template <typename T> Tensor<T> extract_patches(const Tensor<T> &map, std::size_t patch) {
    if (map.rank() != 4 || map.dim(1) != 1) {
        throw DimensionError("extract_patches: expected [B,1,H,W], got " +
                             shape_str(map.shape()));
    }
    const std::size_t B = map.dim(0), H = map.dim(2), W = map.dim(3);
    if (patch == 0 || H % patch != 0 || W % patch != 0) {
        throw DimensionError("extract_patches: extent " + std::to_string(H) + "x" +
                             std::to_string(W) + " not divisible by " + std::to_string(patch));
    }
    const std::size_t ph = H / patch, pw = W / patch, K = patch * patch;
    // index[j] = source offset (within one image) of output slot j.
    std::vector<std::size_t> index(H * W);
    for (std::size_t r = 0; r < ph; ++r) {
        for (std::size_t c = 0; c < pw; ++c) {
            for (std::size_t i = 0; i < patch; ++i) {
                for (std::size_t j = 0; j < patch; ++j) {
                    index[(r * pw + c) * K + i * patch + j] =
                        (r * patch + i) * W + c * patch + j;
                }
            }
        }
    }
    std::vector<T> out(map.numel());
    const auto in = map.data();
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t j = 0; j < index.size(); ++j) {
            out[b * H * W + j] = in[b * H * W + index[j]];
        }
    }
    return Tensor<T>::make_result(
        {B, ph * pw, K}, std::move(out), {map}, [index, B](detail::Node<T> &self) {
            if (T *g = self.parent_grad(0)) {
                const std::size_t n = index.size();
                for (std::size_t b = 0; b < B; ++b) {
                    for (std::size_t j = 0; j < n; ++j) {
                        g[b * n + index[j]] += self.grad[b * n + j];
                    }
                }
            }
        });
}

template <typename T>
Tensor<T> assemble_patches(const Tensor<T> &patches, std::size_t height, std::size_t width) {
    if (patches.rank() != 3) {
        throw DimensionError("assemble_patches: expected [B,P,K], got " +
                             shape_str(patches.shape()));
    }
    const std::size_t B = patches.dim(0), K = patches.dim(2);
    std::size_t patch = 0;
    while (patch * patch < K) {
        ++patch;
    }
    if (patch * patch != K || height % patch != 0 || width % patch != 0 ||
        patches.dim(1) * K != height * width) {
        throw DimensionError("assemble_patches: " + shape_str(patches.shape()) +
                             " does not tile " + std::to_string(height) + "x" +
                             std::to_string(width));
    }
    const std::size_t pw = width / patch;
    Tensor<T> out({B, 1, height, width});
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t p = 0; p < patches.dim(1); ++p) {
            const std::size_t r = p / pw, c = p % pw;
            for (std::size_t i = 0; i < patch; ++i) {
                for (std::size_t j = 0; j < patch; ++j) {
                    out.data()[b * height * width + (r * patch + i) * width + c * patch + j] =
                        patches.data()[(b * patches.dim(1) + p) * K + i * patch + j];
                }
            }
        }
    }
    return out;
}

template <typename T> Tensor<T> patch_encode(const Tensor<T> &map, std::size_t patch) {
    return ops::scale(ops::sigmoid(extract_patches(map, patch)),
                      static_cast<T>(std::numbers::pi));
}

template <typename T>
Tensor<T> circuit_layer(const Tensor<T> &angles, const Tensor<T> &theta,
                        const quantum::CircuitSpec &layout, std::size_t out_h,
                        std::size_t out_w, const CircuitEvaluator &evaluator) {
    if (angles.rank() != 3 || angles.dim(2) != layout.n_qubits) {
        throw DimensionError("circuit_layer: angles " + shape_str(angles.shape()) +
                             " for a " + std::to_string(layout.n_qubits) + "-qubit circuit");
    }
    if (angles.dim(1) != out_h * out_w) {
        throw DimensionError("circuit_layer: " + std::to_string(angles.dim(1)) +
                             " patches cannot fill " + std::to_string(out_h) + "x" +
                             std::to_string(out_w));
    }
    if (theta.shape() != Shape{layout.n_parameters()}) {
        throw DimensionError("circuit_layer: theta " + shape_str(theta.shape()) +
                             " for layout with " + std::to_string(layout.n_parameters()) +
                             " angles");
    }
    quantum::CircuitSpec spec = layout;
    spec.theta.assign(theta.data().begin(), theta.data().end());
    spec.validate();

    const std::size_t B = angles.dim(0), P = angles.dim(1), n = layout.n_qubits;
    std::vector<T> out(B * P);
    std::vector<double> buf(n);
    for (std::size_t bp = 0; bp < B * P; ++bp) {
        for (std::size_t q = 0; q < n; ++q) {
            buf[q] = angles.data()[bp * n + q];
        }
        out[bp] = static_cast<T>(evaluator(spec, buf, false).value);
    }
    return Tensor<T>::make_result(
        {B, 1, out_h, out_w}, std::move(out), {angles, theta},
        [spec, evaluator, B, P, n](detail::Node<T> &self) {
            T *ga = self.parent_grad(0);
            T *gt = self.parent_grad(1);
            if (!ga && !gt) {
                return;
            }
            const auto &ang = self.parents[0]->data;
            std::vector<double> buf(n);
            std::vector<double> dtheta(spec.theta.size(), 0.0);
            for (std::size_t bp = 0; bp < B * P; ++bp) {
                const double up = self.grad[bp];
                if (up == 0.0) {
                    continue;
                }
                for (std::size_t q = 0; q < n; ++q) {
                    buf[q] = ang[bp * n + q];
                }
                const quantum::CircuitGradient cg = evaluator(spec, buf, true);
                if (ga) {
                    for (std::size_t q = 0; q < n; ++q) {
                        ga[bp * n + q] += static_cast<T>(up * cg.d_inputs[q]);
                    }
                }
                for (std::size_t i = 0; i < dtheta.size(); ++i) {
                    dtheta[i] += up * cg.d_theta[i];
                }
            }
            if (gt) {
                for (std::size_t i = 0; i < dtheta.size(); ++i) {
                    gt[i] += static_cast<T>(dtheta[i]);
                }
            }
        });
}

template <typename T>
QuanvBranch<T>::QuanvBranch(const QuanvConfig &config, ParamStore<T> &store,
                            const std::string &prefix, Rng &rng)
    : config_(config), evaluator_(statevector_evaluator()) {
    config_.validate();
    const auto &c = config_;
    conv1_ = Conv2d<T>::create(store, prefix + ".stem.0.conv", c.in_channels, c.stem1_channels,
                               c.stem1_kernel, c.stem1_stride, c.stem1_padding, Init::HeNormal,
                               rng);
    bn1_ = BatchNorm2d<T>::create(store, prefix + ".stem.0.bn", c.stem1_channels);
    conv2_ = Conv2d<T>::create(store, prefix + ".stem.1.conv", c.stem1_channels,
                               c.stem2_channels, c.stem2_kernel, c.stem2_stride,
                               c.stem2_padding, Init::HeNormal, rng);
    bn2_ = BatchNorm2d<T>::create(store, prefix + ".stem.1.bn", c.stem2_channels);
    mixer_ = Conv2d<T>::create(store, prefix + ".mixer", c.stem2_channels, 1, 1, 1, 0,
                               Init::HeNormal, rng);
    Tensor<T> theta({c.n_qubits() * c.circuit_layers});
    for (T &v : theta.data()) {
        v = static_cast<T>((2.0 * uniform01(rng) - 1.0) * c.theta_init_range);
    }
    theta_ = store.add_parameter(prefix + ".circuit.theta", theta);
    restore_ = Conv2d<T>::create(store, prefix + ".restore", 1, c.restore_channels, 1, 1, 0,
                                 Init::HeNormal, rng);
}

template <typename T>
Tensor<T> QuanvBranch<T>::stem(const Tensor<T> &images, const RunContext &ctx) {
    if (images.rank() != 4 || images.dim(1) != config_.in_channels) {
        throw DimensionError("quanv stem: expected [B," + std::to_string(config_.in_channels) +
                             ",H,W], got " + shape_str(images.shape()));
    }
    if (images.dim(2) < 16 || images.dim(3) < 16) {
        throw DimensionError("quanv stem: input " + shape_str(images.shape()) +
                             " smaller than 16x16");
    }
    auto x = ops::gelu(bn1_(conv1_(images), ctx));
    x = ops::gelu(bn2_(conv2_(x), ctx));
    return ops::adaptive_avg_pool2d(x, config_.grid, config_.grid);
}

template <typename T> Tensor<T> QuanvBranch<T>::mix(const Tensor<T> &grid) const {
    if (grid.rank() != 4 || grid.dim(1) != config_.stem2_channels) {
        throw DimensionError("channel mixer: expected " + std::to_string(config_.stem2_channels) +
                             " channels, got " + shape_str(grid.shape()));
    }
    return mixer_(grid);
}

template <typename T> Tensor<T> QuanvBranch<T>::quantum_map(const Tensor<T> &mixed) const {
    const auto angles = patch_encode(mixed, config_.patch);
    const std::size_t h = mixed.dim(2) / config_.patch;
    const std::size_t w = mixed.dim(3) / config_.patch;
    return circuit_layer(angles, theta_, circuit_spec(), h, w, evaluator_);
}

template <typename T> Tensor<T> QuanvBranch<T>::head(const Tensor<T> &qmap) const {
    return ops::flatten(ops::adaptive_avg_pool2d(restore_(qmap), 1, 1), 1);
}

template <typename T>
Tensor<T> QuanvBranch<T>::forward(const Tensor<T> &images, const RunContext &ctx) {
    return head(quantum_map(mix(stem(images, ctx))));
}

template <typename T> quantum::CircuitSpec QuanvBranch<T>::circuit_spec() const {
    quantum::CircuitSpec spec;
    spec.n_qubits = config_.n_qubits();
    spec.n_layers = config_.circuit_layers;
    spec.observable_qubit = config_.observable_qubit;
    spec.theta.assign(theta_.data().begin(), theta_.data().end());
    return spec;
}

#define QVITON_INSTANTIATE_QUANV(T)                                                         \
    template Tensor<T> extract_patches(const Tensor<T> &, std::size_t);                     \
    template Tensor<T> assemble_patches(const Tensor<T> &, std::size_t, std::size_t);       \
    template Tensor<T> patch_encode(const Tensor<T> &, std::size_t);                        \
    template Tensor<T> circuit_layer(const Tensor<T> &, const Tensor<T> &,                  \
                                     const quantum::CircuitSpec &, std::size_t, std::size_t, \
                                     const CircuitEvaluator &);                             \
    template class QuanvBranch<T>;

QVITON_INSTANTIATE_QUANV(float)
QVITON_INSTANTIATE_QUANV(double)

#undef QVITON_INSTANTIATE_QUANV

} // namespace qviton::quanv
