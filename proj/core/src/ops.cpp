// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "qviton/error.hpp"

namespace qviton::ops {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T> using MapMat = Eigen::Map<RowMat<T>>;
template <typename T> using ConstMapMat = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, Eigen::Unaligned, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

template <typename T> using Node = detail::Node<T>;

void require_same_shape(const Shape &a, const Shape &b, const char *op) {
    if (a != b) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                             shape_str(b));
    }
}

void require_rank(const Shape &s, std::size_t rank, const char *op) {
    if (s.size() != rank) {
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                             ", got " + shape_str(s));
    }
}

template <typename T> void accumulate(T *dst, const std::vector<T> &src) {
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] += src[i];
    }
}

template <typename F, typename G, typename T>
Tensor<T> unary(const Tensor<T> &x, F &&value, G &&derivative) {
    const auto in = x.data();
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = value(in[i]);
    }
    return Tensor<T>::make_result(x.shape(), std::move(out), {x},
                                  [derivative](Node<T> &self) {
                                      T *g = self.parent_grad(0);
                                      if (!g) {
                                          return;
                                      }
                                      const auto &xin = self.parents[0]->data;
                                      for (std::size_t i = 0; i < xin.size(); ++i) {
                                          g[i] += self.grad[i] * derivative(xin[i], self.data[i]);
                                      }
                                  });
}

/// Unfolds one image [C, H, W] into columns [C*k*k, Ho*Wo].
template <typename T>
void im2col(const T *img, std::size_t C, std::size_t H, std::size_t W, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t Ho, std::size_t Wo, T *cols) {
    const std::size_t L = Ho * Wo;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t kj = 0; kj < k; ++kj) {
                T *row = cols + ((c * k + ki) * k + kj) * L;
                for (std::size_t oy = 0; oy < Ho; ++oy) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * stride + ki) -
                                    static_cast<std::ptrdiff_t>(pad);
                    T *dst = row + oy * Wo;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) {
                        std::fill(dst, dst + Wo, T{0});
                        continue;
                    }
                    const T *src = img + (c * H + static_cast<std::size_t>(iy)) * W;
                    for (std::size_t ox = 0; ox < Wo; ++ox) {
                        const auto ix = static_cast<std::ptrdiff_t>(ox * stride + kj) -
                                        static_cast<std::ptrdiff_t>(pad);
                        dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W))
                                      ? T{0}
                                      : src[ix];
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im(const T *cols, std::size_t C, std::size_t H, std::size_t W, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t Ho, std::size_t Wo, T *img) {
    const std::size_t L = Ho * Wo;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t kj = 0; kj < k; ++kj) {
                const T *row = cols + ((c * k + ki) * k + kj) * L;
                for (std::size_t oy = 0; oy < Ho; ++oy) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * stride + ki) -
                                    static_cast<std::ptrdiff_t>(pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) {
                        continue;
                    }
                    T *dst = img + (c * H + static_cast<std::size_t>(iy)) * W;
                    for (std::size_t ox = 0; ox < Wo; ++ox) {
                        const auto ix = static_cast<std::ptrdiff_t>(ox * stride + kj) -
                                        static_cast<std::ptrdiff_t>(pad);
                        if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(W)) {
                            dst[ix] += row[oy * Wo + ox];
                        }
                    }
                }
            }
        }
    }
}

} // namespace

template <typename T> Tensor<T> add(const Tensor<T> &a, const Tensor<T> &b) {
    require_same_shape(a.shape(), b.shape(), "add");
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.data()[i] + b.data()[i];
    }
    return Tensor<T>::make_result(a.shape(), std::move(out), {a, b}, [](Node<T> &self) {
        for (std::size_t p = 0; p < 2; ++p) {
            if (T *g = self.parent_grad(p)) {
                accumulate(g, self.grad);
            }
        }
    });
}

template <typename T> Tensor<T> sub(const Tensor<T> &a, const Tensor<T> &b) {
    require_same_shape(a.shape(), b.shape(), "sub");
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.data()[i] - b.data()[i];
    }
    return Tensor<T>::make_result(a.shape(), std::move(out), {a, b}, [](Node<T> &self) {
        if (T *g = self.parent_grad(0)) {
            accumulate(g, self.grad);
        }
        if (T *g = self.parent_grad(1)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] -= self.grad[i];
            }
        }
    });
}

template <typename T> Tensor<T> mul(const Tensor<T> &a, const Tensor<T> &b) {
    require_same_shape(a.shape(), b.shape(), "mul");
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.data()[i] * b.data()[i];
    }
    return Tensor<T>::make_result(a.shape(), std::move(out), {a, b}, [](Node<T> &self) {
        const auto &da = self.parents[0]->data;
        const auto &db = self.parents[1]->data;
        if (T *g = self.parent_grad(0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] += self.grad[i] * db[i];
            }
        }
        if (T *g = self.parent_grad(1)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] += self.grad[i] * da[i];
            }
        }
    });
}

template <typename T> Tensor<T> scale(const Tensor<T> &a, T factor) {
    std::vector<T> out(a.data().begin(), a.data().end());
    for (auto &v : out) {
        v *= factor;
    }
    return Tensor<T>::make_result(a.shape(), std::move(out), {a}, [factor](Node<T> &self) {
        if (T *g = self.parent_grad(0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] += self.grad[i] * factor;
            }
        }
    });
}

template <typename T> Tensor<T> add_broadcast(const Tensor<T> &x, const Tensor<T> &row) {
    const Shape &xs = x.shape();
    const Shape &rs = row.shape();
    if (rs.size() > xs.size() || !std::equal(rs.rbegin(), rs.rend(), xs.rbegin())) {
        throw DimensionError("add_broadcast: " + shape_str(rs) +
                             " is not a trailing block of " + shape_str(xs));
    }
    const std::size_t block = row.numel();
    std::vector<T> out(x.data().begin(), x.data().end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += row.data()[i % block];
    }
    return Tensor<T>::make_result(xs, std::move(out), {x, row}, [block](Node<T> &self) {
        if (T *g = self.parent_grad(0)) {
            accumulate(g, self.grad);
        }
        if (T *g = self.parent_grad(1)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i % block] += self.grad[i];
            }
        }
    });
}

template <typename T> Tensor<T> sum(const Tensor<T> &a) {
    T total{0};
    for (T v : a.data()) {
        total += v;
    }
    return Tensor<T>::make_result(Shape{}, {total}, {a}, [](Node<T> &self) {
        if (T *g = self.parent_grad(0)) {
            const std::size_t n = self.parents[0]->data.size();
            for (std::size_t i = 0; i < n; ++i) {
                g[i] += self.grad[0];
            }
        }
    });
}

template <typename T> Tensor<T> mean(const Tensor<T> &a) {
    if (a.numel() == 0) {
        throw DimensionError("mean of an empty tensor");
    }
    return scale(sum(a), T{1} / static_cast<T>(a.numel()));
}

template <typename T> Tensor<T> matmul(const Tensor<T> &a, const Tensor<T> &b) {
    require_rank(a.shape(), 2, "matmul");
    require_rank(b.shape(), 2, "matmul");
    const std::size_t M = a.dim(0), K = a.dim(1), N = b.dim(1);
    if (b.dim(0) != K) {
        throw DimensionError("matmul: inner extents disagree for " + shape_str(a.shape()) +
                             " and " + shape_str(b.shape()));
    }
    std::vector<T> out(M * N);
    MapMat<T>(out.data(), M, N).noalias() =
        ConstMapMat<T>(a.data().data(), M, K) * ConstMapMat<T>(b.data().data(), K, N);
    return Tensor<T>::make_result({M, N}, std::move(out), {a, b}, [M, K, N](Node<T> &self) {
        ConstMapMat<T> G(self.grad.data(), M, N);
        if (T *g = self.parent_grad(0)) {
            MapMat<T>(g, M, K).noalias() +=
                G * ConstMapMat<T>(self.parents[1]->data.data(), K, N).transpose();
        }
        if (T *g = self.parent_grad(1)) {
            MapMat<T>(g, K, N).noalias() +=
                ConstMapMat<T>(self.parents[0]->data.data(), M, K).transpose() * G;
        }
    });
}

template <typename T>
Tensor<T> linear(const Tensor<T> &x, const Tensor<T> &weight,
                 const std::optional<Tensor<T>> &bias) {
    require_rank(weight.shape(), 2, "linear");
    const std::size_t K = weight.dim(0), N = weight.dim(1);
    if (x.rank() == 0 || x.shape().back() != K) {
        throw DimensionError("linear: input " + shape_str(x.shape()) +
                             " does not match weight " + shape_str(weight.shape()));
    }
    if (bias && bias->shape() != Shape{N}) {
        throw DimensionError("linear: bias " + shape_str(bias->shape()) +
                             " does not match output width " + std::to_string(N));
    }
    const std::size_t M = x.numel() / K;
    Shape out_shape = x.shape();
    out_shape.back() = N;
    std::vector<T> out(M * N);
    MapMat<T> Y(out.data(), M, N);
    Y.noalias() = ConstMapMat<T>(x.data().data(), M, K) *
                  ConstMapMat<T>(weight.data().data(), K, N);
    if (bias) {
        Y.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(
            bias->data().data(), static_cast<Eigen::Index>(N));
    }
    std::vector<Tensor<T>> parents{x, weight};
    if (bias) {
        parents.push_back(*bias);
    }
    return Tensor<T>::make_result(
        std::move(out_shape), std::move(out), std::move(parents), [M, K, N](Node<T> &self) {
            ConstMapMat<T> G(self.grad.data(), M, N);
            if (T *g = self.parent_grad(0)) {
                MapMat<T>(g, M, K).noalias() +=
                    G * ConstMapMat<T>(self.parents[1]->data.data(), K, N).transpose();
            }
            if (T *g = self.parent_grad(1)) {
                MapMat<T>(g, K, N).noalias() +=
                    ConstMapMat<T>(self.parents[0]->data.data(), M, K).transpose() * G;
            }
            if (self.parents.size() > 2) {
                if (T *g = self.parent_grad(2)) {
                    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(
                        g, static_cast<Eigen::Index>(N)) += G.colwise().sum();
                }
            }
        });
}

std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride,
                               std::size_t padding) {
    if (stride == 0) {
        throw ConfigError("conv2d: stride must be >= 1");
    }
    if (kernel == 0 || kernel > input + 2 * padding) {
        throw DimensionError("conv2d: kernel " + std::to_string(kernel) +
                             " larger than padded input " +
                             std::to_string(input + 2 * padding));
    }
    return (input + 2 * padding - kernel) / stride + 1;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T> &x, const Tensor<T> &kernel,
                 const std::optional<Tensor<T>> &bias, std::size_t stride,
                 std::size_t padding) {
    require_rank(x.shape(), 4, "conv2d input");
    require_rank(kernel.shape(), 4, "conv2d kernel");
    const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const std::size_t F = kernel.dim(0), k = kernel.dim(2);
    if (kernel.dim(1) != C || kernel.dim(3) != k) {
        throw DimensionError("conv2d: kernel " + shape_str(kernel.shape()) +
                             " incompatible with input " + shape_str(x.shape()));
    }
    if (bias && bias->shape() != Shape{F}) {
        throw DimensionError("conv2d: bias " + shape_str(bias->shape()) + " for " +
                             std::to_string(F) + " filters");
    }
    const std::size_t Ho = conv_output_extent(H, k, stride, padding);
    const std::size_t Wo = conv_output_extent(W, k, stride, padding);
    const std::size_t L = Ho * Wo, CKK = C * k * k;

    std::vector<T> out(N * F * L);
    std::vector<T> cols(CKK * L);
    ConstMapMat<T> Wm(kernel.data().data(), F, CKK);
    for (std::size_t n = 0; n < N; ++n) {
        im2col(x.data().data() + n * C * H * W, C, H, W, k, stride, padding, Ho, Wo,
               cols.data());
        MapMat<T> Y(out.data() + n * F * L, F, L);
        Y.noalias() = Wm * ConstMapMat<T>(cols.data(), CKK, L);
        if (bias) {
            Y.colwise() += Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(
                bias->data().data(), static_cast<Eigen::Index>(F));
        }
    }

    std::vector<Tensor<T>> parents{x, kernel};
    if (bias) {
        parents.push_back(*bias);
    }
    return Tensor<T>::make_result(
        {N, F, Ho, Wo}, std::move(out), std::move(parents),
        [=](Node<T> &self) {
            const T *xin = self.parents[0]->data.data();
            ConstMapMat<T> Wk(self.parents[1]->data.data(), F, CKK);
            T *gx = self.parent_grad(0);
            T *gw = self.parent_grad(1);
            T *gb = self.parents.size() > 2 ? self.parent_grad(2) : nullptr;
            std::vector<T> buf(CKK * L);
            for (std::size_t n = 0; n < N; ++n) {
                ConstMapMat<T> G(self.grad.data() + n * F * L, F, L);
                if (gw) {
                    im2col(xin + n * C * H * W, C, H, W, k, stride, padding, Ho, Wo,
                           buf.data());
                    MapMat<T>(gw, F, CKK).noalias() +=
                        G * ConstMapMat<T>(buf.data(), CKK, L).transpose();
                }
                if (gx) {
                    MapMat<T>(buf.data(), CKK, L).noalias() = Wk.transpose() * G;
                    col2im(buf.data(), C, H, W, k, stride, padding, Ho, Wo,
                           gx + n * C * H * W);
                }
                if (gb) {
                    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(
                        gb, static_cast<Eigen::Index>(F)) += G.rowwise().sum();
                }
            }
        });
}

template <typename T>
Tensor<T> batch_norm2d(const Tensor<T> &x, const Tensor<T> &gamma, const Tensor<T> &beta,
                       Tensor<T> &running_mean, Tensor<T> &running_var,
                       const BatchNormOptions &options) {
    require_rank(x.shape(), 4, "batch_norm2d");
    const std::size_t N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
    for (const Tensor<T> *t : std::array<const Tensor<T> *, 4>{&gamma, &beta, &running_mean, &running_var}) {
        if (t->shape() != Shape{C}) {
            throw DimensionError("batch_norm2d: per-channel tensor " +
                                 shape_str(t->shape()) + " for " + std::to_string(C) +
                                 " channels");
        }
    }
    const std::size_t M = N * HW;
    if (options.training && M < 2) {
        throw DimensionError("batch_norm2d: training mode needs more than one value per channel");
    }
    auto xhat = std::make_shared<std::vector<T>>(x.numel());
    auto invstd = std::make_shared<std::vector<T>>(C);
    std::vector<T> out(x.numel());
    const auto in = x.data();
    for (std::size_t c = 0; c < C; ++c) {
        double mu = 0.0, var = 0.0;
        if (options.training) {
            for (std::size_t n = 0; n < N; ++n) {
                const T *p = in.data() + (n * C + c) * HW;
                for (std::size_t i = 0; i < HW; ++i) {
                    mu += p[i];
                }
            }
            mu /= static_cast<double>(M);
            for (std::size_t n = 0; n < N; ++n) {
                const T *p = in.data() + (n * C + c) * HW;
                for (std::size_t i = 0; i < HW; ++i) {
                    const double d = p[i] - mu;
                    var += d * d;
                }
            }
            var /= static_cast<double>(M);
            const double m = options.momentum;
            running_mean.data()[c] =
                static_cast<T>((1.0 - m) * running_mean.data()[c] + m * mu);
            running_var.data()[c] = static_cast<T>(
                (1.0 - m) * running_var.data()[c] +
                m * var * static_cast<double>(M) / static_cast<double>(M - 1));
        } else {
            mu = running_mean.data()[c];
            var = running_var.data()[c];
        }
        const double is = 1.0 / std::sqrt(var + options.eps);
        (*invstd)[c] = static_cast<T>(is);
        const T g = gamma.data()[c], b = beta.data()[c];
        for (std::size_t n = 0; n < N; ++n) {
            const std::size_t off = (n * C + c) * HW;
            for (std::size_t i = 0; i < HW; ++i) {
                const T xh = static_cast<T>((in[off + i] - mu) * is);
                (*xhat)[off + i] = xh;
                out[off + i] = xh * g + b;
            }
        }
    }
    const bool training = options.training;
    return Tensor<T>::make_result(
        x.shape(), std::move(out), {x, gamma, beta},
        [=](Node<T> &self) {
            const auto &gam = self.parents[1]->data;
            T *gx = self.parent_grad(0);
            T *gg = self.parent_grad(1);
            T *gbeta = self.parent_grad(2);
            for (std::size_t c = 0; c < C; ++c) {
                double sum_g = 0.0, sum_gx = 0.0;
                for (std::size_t n = 0; n < N; ++n) {
                    const std::size_t off = (n * C + c) * HW;
                    for (std::size_t i = 0; i < HW; ++i) {
                        sum_g += self.grad[off + i];
                        sum_gx += self.grad[off + i] * (*xhat)[off + i];
                    }
                }
                if (gg) {
                    gg[c] += static_cast<T>(sum_gx);
                }
                if (gbeta) {
                    gbeta[c] += static_cast<T>(sum_g);
                }
                if (!gx) {
                    continue;
                }
                const double scale_c = gam[c] * (*invstd)[c];
                const double inv_m = 1.0 / static_cast<double>(M);
                for (std::size_t n = 0; n < N; ++n) {
                    const std::size_t off = (n * C + c) * HW;
                    for (std::size_t i = 0; i < HW; ++i) {
                        double d = self.grad[off + i];
                        if (training) {
                            d -= inv_m * (sum_g + (*xhat)[off + i] * sum_gx);
                        }
                        gx[off + i] += static_cast<T>(scale_c * d);
                    }
                }
            }
        });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T> &x, const Tensor<T> &gamma, const Tensor<T> &beta,
                     double eps) {
    if (x.rank() == 0) {
        throw DimensionError("layer_norm: scalar input");
    }
    const std::size_t D = x.shape().back();
    if (D == 0 || gamma.shape() != Shape{D} || beta.shape() != Shape{D}) {
        throw DimensionError("layer_norm: affine parameters must have shape [" +
                             std::to_string(D) + "]");
    }
    if (!(eps > 0.0)) {
        throw ConfigError("layer_norm: eps must be positive");
    }
    const std::size_t R = x.numel() / D;
    auto xhat = std::make_shared<std::vector<T>>(x.numel());
    auto invstd = std::make_shared<std::vector<T>>(R);
    std::vector<T> out(x.numel());
    const auto in = x.data();
    for (std::size_t r = 0; r < R; ++r) {
        const T *row = in.data() + r * D;
        double mu = 0.0;
        for (std::size_t j = 0; j < D; ++j) {
            mu += row[j];
        }
        mu /= static_cast<double>(D);
        double var = 0.0;
        for (std::size_t j = 0; j < D; ++j) {
            var += (row[j] - mu) * (row[j] - mu);
        }
        var /= static_cast<double>(D);
        const double is = 1.0 / std::sqrt(var + eps);
        (*invstd)[r] = static_cast<T>(is);
        for (std::size_t j = 0; j < D; ++j) {
            const T xh = static_cast<T>((row[j] - mu) * is);
            (*xhat)[r * D + j] = xh;
            out[r * D + j] = xh * gamma.data()[j] + beta.data()[j];
        }
    }
    return Tensor<T>::make_result(
        x.shape(), std::move(out), {x, gamma, beta}, [=](Node<T> &self) {
            const auto &gam = self.parents[1]->data;
            T *gx = self.parent_grad(0);
            T *gg = self.parent_grad(1);
            T *gb = self.parent_grad(2);
            std::vector<double> dxhat(D);
            for (std::size_t r = 0; r < R; ++r) {
                const T *g = self.grad.data() + r * D;
                const T *xh = xhat->data() + r * D;
                double mean_d = 0.0, mean_dx = 0.0;
                for (std::size_t j = 0; j < D; ++j) {
                    if (gg) {
                        gg[j] += g[j] * xh[j];
                    }
                    if (gb) {
                        gb[j] += g[j];
                    }
                    dxhat[j] = static_cast<double>(g[j]) * gam[j];
                    mean_d += dxhat[j];
                    mean_dx += dxhat[j] * xh[j];
                }
                if (!gx) {
                    continue;
                }
                mean_d /= static_cast<double>(D);
                mean_dx /= static_cast<double>(D);
                for (std::size_t j = 0; j < D; ++j) {
                    gx[r * D + j] +=
                        static_cast<T>((*invstd)[r] * (dxhat[j] - mean_d - xh[j] * mean_dx));
                }
            }
        });
}

template <typename T> Tensor<T> gelu(const Tensor<T> &x) {
    return unary(
        x,
        [](T v) {
            const double d = v;
            return static_cast<T>(0.5 * d * (1.0 + std::erf(d * std::numbers::sqrt2 / 2.0)));
        },
        [](T v, T) {
            const double d = v;
            const double cdf = 0.5 * (1.0 + std::erf(d * std::numbers::sqrt2 / 2.0));
            const double pdf = std::exp(-0.5 * d * d) * std::numbers::inv_sqrtpi /
                               std::numbers::sqrt2;
            return static_cast<T>(cdf + d * pdf);
        });
}

template <typename T> Tensor<T> sigmoid(const Tensor<T> &x) {
    return unary(
        x,
        [](T v) {
            if (v >= T{0}) {
                return T{1} / (T{1} + std::exp(-v));
            }
            const T e = std::exp(v);
            return e / (T{1} + e);
        },
        [](T, T y) { return y * (T{1} - y); });
}

template <typename T> Tensor<T> tanh(const Tensor<T> &x) {
    return unary(
        x, [](T v) { return std::tanh(v); }, [](T, T y) { return T{1} - y * y; });
}

template <typename T> Tensor<T> dropout(const Tensor<T> &x, double p, bool training, Rng &rng) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw ConfigError("dropout probability must lie in [0, 1), got " + std::to_string(p));
    }
    if (!training || p == 0.0) {
        return x;
    }
    const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
    auto mask = std::make_shared<std::vector<T>>(x.numel());
    std::vector<T> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        (*mask)[i] = uniform01(rng) < p ? T{0} : keep_scale;
        out[i] = x.data()[i] * (*mask)[i];
    }
    return Tensor<T>::make_result(x.shape(), std::move(out), {x}, [mask](Node<T> &self) {
        if (T *g = self.parent_grad(0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] += self.grad[i] * (*mask)[i];
            }
        }
    });
}

template <typename T>
Tensor<T> adaptive_avg_pool2d(const Tensor<T> &x, std::size_t out_h, std::size_t out_w) {
    require_rank(x.shape(), 4, "adaptive_avg_pool2d");
    const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (out_h == 0 || out_w == 0 || H == 0 || W == 0) {
        throw DimensionError("adaptive_avg_pool2d: empty input or target");
    }
    auto bin = [](std::size_t i, std::size_t in, std::size_t out) {
        const std::size_t lo = (i * in) / out;
        const std::size_t hi = ((i + 1) * in + out - 1) / out;
        return std::pair{lo, hi};
    };
    std::vector<T> out(N * C * out_h * out_w);
    const auto in = x.data();
    for (std::size_t nc = 0; nc < N * C; ++nc) {
        const T *plane = in.data() + nc * H * W;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
            const auto [y0, y1] = bin(oy, H, out_h);
            for (std::size_t ox = 0; ox < out_w; ++ox) {
                const auto [x0, x1] = bin(ox, W, out_w);
                double acc = 0.0;
                for (std::size_t y = y0; y < y1; ++y) {
                    for (std::size_t xx = x0; xx < x1; ++xx) {
                        acc += plane[y * W + xx];
                    }
                }
                out[(nc * out_h + oy) * out_w + ox] =
                    static_cast<T>(acc / static_cast<double>((y1 - y0) * (x1 - x0)));
            }
        }
    }
    return Tensor<T>::make_result(
        {N, C, out_h, out_w}, std::move(out), {x}, [=](Node<T> &self) {
            T *g = self.parent_grad(0);
            if (!g) {
                return;
            }
            for (std::size_t nc = 0; nc < N * C; ++nc) {
                for (std::size_t oy = 0; oy < out_h; ++oy) {
                    const auto [y0, y1] = bin(oy, H, out_h);
                    for (std::size_t ox = 0; ox < out_w; ++ox) {
                        const auto [x0, x1] = bin(ox, W, out_w);
                        const T share = self.grad[(nc * out_h + oy) * out_w + ox] /
                                        static_cast<T>((y1 - y0) * (x1 - x0));
                        for (std::size_t y = y0; y < y1; ++y) {
                            for (std::size_t xx = x0; xx < x1; ++xx) {
                                g[nc * H * W + y * W + xx] += share;
                            }
                        }
                    }
                }
            }
        });
}

template <typename T> Tensor<T> concat(const std::vector<Tensor<T>> &parts, std::size_t axis) {
    if (parts.empty()) {
        throw DimensionError("concat: no inputs");
    }
    const Shape &first = parts.front().shape();
    if (axis >= first.size()) {
        throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for " +
                             shape_str(first));
    }
    Shape out_shape = first;
    out_shape[axis] = 0;
    for (const auto &p : parts) {
        const Shape &s = p.shape();
        bool ok = s.size() == first.size();
        for (std::size_t d = 0; ok && d < s.size(); ++d) {
            ok = d == axis || s[d] == first[d];
        }
        if (!ok) {
            throw DimensionError("concat: incompatible shapes " + shape_str(first) + " and " +
                                 shape_str(s));
        }
        out_shape[axis] += s[axis];
    }
    std::size_t outer = 1, inner = 1;
    for (std::size_t d = 0; d < axis; ++d) {
        outer *= first[d];
    }
    for (std::size_t d = axis + 1; d < first.size(); ++d) {
        inner *= first[d];
    }
    const std::size_t out_row = out_shape[axis] * inner;
    std::vector<std::size_t> widths, offsets;
    std::size_t off = 0;
    for (const auto &p : parts) {
        widths.push_back(p.shape()[axis] * inner);
        offsets.push_back(off);
        off += widths.back();
    }
    std::vector<T> out(outer * out_row);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const T *src = parts[i].data().data();
        for (std::size_t o = 0; o < outer; ++o) {
            std::copy_n(src + o * widths[i], widths[i], out.data() + o * out_row + offsets[i]);
        }
    }
    return Tensor<T>::make_result(
        std::move(out_shape), std::move(out), parts, [=](Node<T> &self) {
            for (std::size_t i = 0; i < widths.size(); ++i) {
                T *g = self.parent_grad(i);
                if (!g) {
                    continue;
                }
                for (std::size_t o = 0; o < outer; ++o) {
                    const T *src = self.grad.data() + o * out_row + offsets[i];
                    for (std::size_t j = 0; j < widths[i]; ++j) {
                        g[o * widths[i] + j] += src[j];
                    }
                }
            }
        });
}

template <typename T> Tensor<T> flatten(const Tensor<T> &x, std::size_t start_dim) {
    if (start_dim >= x.rank()) {
        throw DimensionError("flatten: start_dim " + std::to_string(start_dim) +
                             " out of range for " + shape_str(x.shape()));
    }
    Shape s(x.shape().begin(), x.shape().begin() + static_cast<std::ptrdiff_t>(start_dim));
    std::size_t tail = 1;
    for (std::size_t d = start_dim; d < x.rank(); ++d) {
        tail *= x.dim(d);
    }
    s.push_back(tail);
    return x.reshape(std::move(s));
}

template <typename T> Tensor<T> transpose12(const Tensor<T> &x) {
    require_rank(x.shape(), 3, "transpose12");
    const std::size_t B = x.dim(0), M = x.dim(1), N = x.dim(2);
    std::vector<T> out(x.numel());
    const auto in = x.data();
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t i = 0; i < M; ++i) {
            for (std::size_t j = 0; j < N; ++j) {
                out[(b * N + j) * M + i] = in[(b * M + i) * N + j];
            }
        }
    }
    return Tensor<T>::make_result({B, N, M}, std::move(out), {x}, [=](Node<T> &self) {
        if (T *g = self.parent_grad(0)) {
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t i = 0; i < M; ++i) {
                    for (std::size_t j = 0; j < N; ++j) {
                        g[(b * M + i) * N + j] += self.grad[(b * N + j) * M + i];
                    }
                }
            }
        }
    });
}

template <typename T> Tensor<T> repeat_batch(const Tensor<T> &x, std::size_t copies) {
    if (x.rank() == 0 || x.dim(0) != 1) {
        throw DimensionError("repeat_batch: expected leading extent 1, got " +
                             shape_str(x.shape()));
    }
    Shape s = x.shape();
    s[0] = copies;
    const std::size_t block = x.numel();
    std::vector<T> out(block * copies);
    for (std::size_t c = 0; c < copies; ++c) {
        std::copy_n(x.data().data(), block, out.data() + c * block);
    }
    return Tensor<T>::make_result(std::move(s), std::move(out), {x}, [block](Node<T> &self) {
        if (T *g = self.parent_grad(0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i % block] += self.grad[i];
            }
        }
    });
}

template <typename T> Tensor<T> select_token(const Tensor<T> &x, std::size_t index) {
    require_rank(x.shape(), 3, "select_token");
    const std::size_t B = x.dim(0), Tn = x.dim(1), D = x.dim(2);
    if (index >= Tn) {
        throw IndexError("select_token: index " + std::to_string(index) + " of " +
                         std::to_string(Tn) + " tokens");
    }
    std::vector<T> out(B * D);
    for (std::size_t b = 0; b < B; ++b) {
        std::copy_n(x.data().data() + (b * Tn + index) * D, D, out.data() + b * D);
    }
    return Tensor<T>::make_result({B, D}, std::move(out), {x}, [=](Node<T> &self) {
        if (T *g = self.parent_grad(0)) {
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t d = 0; d < D; ++d) {
                    g[(b * Tn + index) * D + d] += self.grad[b * D + d];
                }
            }
        }
    });
}

template <typename T> Tensor<T> softmax(const Tensor<T> &x) {
    if (x.rank() == 0) {
        throw DimensionError("softmax: scalar input");
    }
    const std::size_t C = x.shape().back();
    const std::size_t R = x.numel() / C;
    std::vector<T> out(x.numel());
    const auto in = x.data();
    for (std::size_t r = 0; r < R; ++r) {
        const T *row = in.data() + r * C;
        const T mx = *std::max_element(row, row + C);
        double z = 0.0;
        for (std::size_t j = 0; j < C; ++j) {
            z += std::exp(static_cast<double>(row[j] - mx));
        }
        for (std::size_t j = 0; j < C; ++j) {
            out[r * C + j] = static_cast<T>(std::exp(static_cast<double>(row[j] - mx)) / z);
        }
    }
    return Tensor<T>::make_result(x.shape(), std::move(out), {x}, [=](Node<T> &self) {
        if (T *g = self.parent_grad(0)) {
            for (std::size_t r = 0; r < R; ++r) {
                const T *y = self.data.data() + r * C;
                const T *gy = self.grad.data() + r * C;
                T dot{0};
                for (std::size_t j = 0; j < C; ++j) {
                    dot += gy[j] * y[j];
                }
                for (std::size_t j = 0; j < C; ++j) {
                    g[r * C + j] += y[j] * (gy[j] - dot);
                }
            }
        }
    });
}

template <typename T>
Tensor<T> softmax_cross_entropy(const Tensor<T> &logits, std::span<const int> labels) {
    require_rank(logits.shape(), 2, "softmax_cross_entropy");
    const std::size_t B = logits.dim(0), C = logits.dim(1);
    if (labels.size() != B) {
        throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                             " labels for batch of " + std::to_string(B));
    }
    if (B == 0) {
        throw DimensionError("softmax_cross_entropy: empty batch");
    }
    auto probs = std::make_shared<std::vector<double>>(B * C);
    auto lab = std::make_shared<std::vector<int>>(labels.begin(), labels.end());
    double loss = 0.0;
    const auto in = logits.data();
    for (std::size_t b = 0; b < B; ++b) {
        const int y = labels[b];
        if (y < 0 || static_cast<std::size_t>(y) >= C) {
            throw IndexError("softmax_cross_entropy: label " + std::to_string(y) +
                             " outside [0, " + std::to_string(C) + ")");
        }
        const T *row = in.data() + b * C;
        const double mx = *std::max_element(row, row + C);
        double z = 0.0;
        for (std::size_t j = 0; j < C; ++j) {
            z += std::exp(row[j] - mx);
        }
        for (std::size_t j = 0; j < C; ++j) {
            (*probs)[b * C + j] = std::exp(row[j] - mx) / z;
        }
        loss += std::log(z) - (row[y] - mx);
    }
    loss /= static_cast<double>(B);
    return Tensor<T>::make_result(
        Shape{}, {static_cast<T>(loss)}, {logits}, [=](Node<T> &self) {
            if (T *g = self.parent_grad(0)) {
                const double up = self.grad[0] / static_cast<double>(B);
                for (std::size_t b = 0; b < B; ++b) {
                    for (std::size_t j = 0; j < C; ++j) {
                        const double target = static_cast<int>(j) == (*lab)[b] ? 1.0 : 0.0;
                        g[b * C + j] += static_cast<T>(up * ((*probs)[b * C + j] - target));
                    }
                }
            }
        });
}

namespace {

struct AttentionDims {
    std::size_t B, Tn, D, H, dh;
};

template <typename T>
AttentionDims attention_dims(const Tensor<T> &q, const Tensor<T> &k, std::size_t n_heads) {
    require_rank(q.shape(), 3, "attention");
    require_same_shape(q.shape(), k.shape(), "attention");
    const std::size_t D = q.dim(2);
    if (n_heads == 0 || D % n_heads != 0) {
        throw ConfigError("attention: width " + std::to_string(D) +
                          " not divisible by head count " + std::to_string(n_heads));
    }
    return {q.dim(0), q.dim(1), D, n_heads, D / n_heads};
}

template <typename T>
void attention_probs(const T *q, const T *k, const AttentionDims &a, T *probs) {
    const T sc = static_cast<T>(1.0 / std::sqrt(static_cast<double>(a.dh)));
    const auto Tn = static_cast<Eigen::Index>(a.Tn);
    const auto dh = static_cast<Eigen::Index>(a.dh);
    const Eigen::OuterStride<> stride(static_cast<Eigen::Index>(a.D));
    for (std::size_t b = 0; b < a.B; ++b) {
        for (std::size_t h = 0; h < a.H; ++h) {
            const std::size_t base = b * a.Tn * a.D + h * a.dh;
            ConstStridedMap<T> Q(q + base, Tn, dh, stride);
            ConstStridedMap<T> K(k + base, Tn, dh, stride);
            MapMat<T> P(probs + (b * a.H + h) * a.Tn * a.Tn, Tn, Tn);
            P.noalias() = (Q * K.transpose()) * sc;
            for (Eigen::Index r = 0; r < Tn; ++r) {
                const T mx = P.row(r).maxCoeff();
                double z = 0.0;
                for (Eigen::Index c = 0; c < Tn; ++c) {
                    z += std::exp(static_cast<double>(P(r, c) - mx));
                }
                for (Eigen::Index c = 0; c < Tn; ++c) {
                    P(r, c) = static_cast<T>(std::exp(static_cast<double>(P(r, c) - mx)) / z);
                }
            }
        }
    }
}

} // namespace

template <typename T>
std::vector<T> attention_weights(const Tensor<T> &q, const Tensor<T> &k, std::size_t n_heads) {
    const AttentionDims a = attention_dims(q, k, n_heads);
    std::vector<T> probs(a.B * a.H * a.Tn * a.Tn);
    attention_probs(q.data().data(), k.data().data(), a, probs.data());
    return probs;
}

template <typename T>
Tensor<T> attention(const Tensor<T> &q, const Tensor<T> &k, const Tensor<T> &v,
                    std::size_t n_heads) {
    const AttentionDims a = attention_dims(q, k, n_heads);
    require_same_shape(q.shape(), v.shape(), "attention");
    auto probs = std::make_shared<std::vector<T>>(a.B * a.H * a.Tn * a.Tn);
    attention_probs(q.data().data(), k.data().data(), a, probs->data());

    const auto Tn = static_cast<Eigen::Index>(a.Tn);
    const auto dh = static_cast<Eigen::Index>(a.dh);
    const Eigen::OuterStride<> stride(static_cast<Eigen::Index>(a.D));
    std::vector<T> out(q.numel());
    for (std::size_t b = 0; b < a.B; ++b) {
        for (std::size_t h = 0; h < a.H; ++h) {
            const std::size_t base = b * a.Tn * a.D + h * a.dh;
            ConstMapMat<T> P(probs->data() + (b * a.H + h) * a.Tn * a.Tn, Tn, Tn);
            StridedMap<T>(out.data() + base, Tn, dh, stride).noalias() =
                P * ConstStridedMap<T>(v.data().data() + base, Tn, dh, stride);
        }
    }

    return Tensor<T>::make_result(q.shape(), std::move(out), {q, k, v}, [=](Node<T> &self) {
        const T sc = static_cast<T>(1.0 / std::sqrt(static_cast<double>(a.dh)));
        const T *qd = self.parents[0]->data.data();
        const T *kd = self.parents[1]->data.data();
        const T *vd = self.parents[2]->data.data();
        T *gq = self.parent_grad(0);
        T *gk = self.parent_grad(1);
        T *gv = self.parent_grad(2);
        RowMat<T> dP(Tn, Tn);
        for (std::size_t b = 0; b < a.B; ++b) {
            for (std::size_t h = 0; h < a.H; ++h) {
                const std::size_t base = b * a.Tn * a.D + h * a.dh;
                ConstMapMat<T> P(probs->data() + (b * a.H + h) * a.Tn * a.Tn, Tn, Tn);
                ConstStridedMap<T> G(self.grad.data() + base, Tn, dh, stride);
                ConstStridedMap<T> V(vd + base, Tn, dh, stride);
                if (gv) {
                    StridedMap<T>(gv + base, Tn, dh, stride).noalias() += P.transpose() * G;
                }
                if (!gq && !gk) {
                    continue;
                }
                dP.noalias() = G * V.transpose();
                for (Eigen::Index r = 0; r < Tn; ++r) {
                    const T dot = dP.row(r).dot(P.row(r));
                    dP.row(r) = (P.row(r).array() * (dP.row(r).array() - dot)).matrix();
                }
                dP *= sc;
                if (gq) {
                    StridedMap<T>(gq + base, Tn, dh, stride).noalias() +=
                        dP * ConstStridedMap<T>(kd + base, Tn, dh, stride);
                }
                if (gk) {
                    StridedMap<T>(gk + base, Tn, dh, stride).noalias() +=
                        dP.transpose() * ConstStridedMap<T>(qd + base, Tn, dh, stride);
                }
            }
        }
    });
}

#define QVITON_INSTANTIATE_OPS(T)                                                          \
    template Tensor<T> add(const Tensor<T> &, const Tensor<T> &);                          \
    template Tensor<T> sub(const Tensor<T> &, const Tensor<T> &);                          \
    template Tensor<T> mul(const Tensor<T> &, const Tensor<T> &);                          \
    template Tensor<T> scale(const Tensor<T> &, T);                                        \
    template Tensor<T> add_broadcast(const Tensor<T> &, const Tensor<T> &);                \
    template Tensor<T> sum(const Tensor<T> &);                                             \
    template Tensor<T> mean(const Tensor<T> &);                                            \
    template Tensor<T> matmul(const Tensor<T> &, const Tensor<T> &);                       \
    template Tensor<T> linear(const Tensor<T> &, const Tensor<T> &,                        \
                              const std::optional<Tensor<T>> &);                           \
    template Tensor<T> conv2d(const Tensor<T> &, const Tensor<T> &,                        \
                              const std::optional<Tensor<T>> &, std::size_t, std::size_t); \
    template Tensor<T> batch_norm2d(const Tensor<T> &, const Tensor<T> &, const Tensor<T> &, \
                                    Tensor<T> &, Tensor<T> &, const BatchNormOptions &);   \
    template Tensor<T> layer_norm(const Tensor<T> &, const Tensor<T> &, const Tensor<T> &, \
                                  double);                                                 \
    template Tensor<T> gelu(const Tensor<T> &);                                            \
    template Tensor<T> sigmoid(const Tensor<T> &);                                         \
    template Tensor<T> tanh(const Tensor<T> &);                                            \
    template Tensor<T> dropout(const Tensor<T> &, double, bool, Rng &);                    \
    template Tensor<T> adaptive_avg_pool2d(const Tensor<T> &, std::size_t, std::size_t);   \
    template Tensor<T> concat(const std::vector<Tensor<T>> &, std::size_t);                \
    template Tensor<T> flatten(const Tensor<T> &, std::size_t);                            \
    template Tensor<T> transpose12(const Tensor<T> &);                                     \
    template Tensor<T> repeat_batch(const Tensor<T> &, std::size_t);                       \
    template Tensor<T> select_token(const Tensor<T> &, std::size_t);                       \
    template Tensor<T> softmax(const Tensor<T> &);                                         \
    template Tensor<T> softmax_cross_entropy(const Tensor<T> &, std::span<const int>);     \
    template Tensor<T> attention(const Tensor<T> &, const Tensor<T> &, const Tensor<T> &,  \
                                 std::size_t);                                             \
    template std::vector<T> attention_weights(const Tensor<T> &, const Tensor<T> &,        \
                                              std::size_t);

QVITON_INSTANTIATE_OPS(float)
QVITON_INSTANTIATE_OPS(double)

#undef QVITON_INSTANTIATE_OPS

} // namespace qviton::ops
