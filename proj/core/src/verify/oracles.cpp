// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/verify/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "qviton/error.hpp"

namespace qviton::verify {

namespace {

using Block = std::array<Complex, 4>; // row-major 2x2

DenseOperator kron(const DenseOperator &a, const DenseOperator &b) {
    DenseOperator out;
    out.dim = a.dim * b.dim;
    out.entries.assign(out.dim * out.dim, Complex{});
    for (std::size_t ar = 0; ar < a.dim; ++ar) {
        for (std::size_t ac = 0; ac < a.dim; ++ac) {
            for (std::size_t br = 0; br < b.dim; ++br) {
                for (std::size_t bc = 0; bc < b.dim; ++bc) {
                    out.entries[(ar * b.dim + br) * out.dim + ac * b.dim + bc] =
                        a.at(ar, ac) * b.at(br, bc);
                }
            }
        }
    }
    return out;
}

DenseOperator from_block(const Block &m) {
    DenseOperator out;
    out.dim = 2;
    out.entries.assign(m.begin(), m.end());
    return out;
}

} // namespace

DenseOperator DenseOperator::identity(std::size_t dim) {
    DenseOperator out;
    out.dim = dim;
    out.entries.assign(dim * dim, Complex{});
    for (std::size_t i = 0; i < dim; ++i) {
        out.entries[i * dim + i] = 1.0;
    }
    return out;
}

DenseOperator DenseOperator::compose(const DenseOperator &rhs) const {
    if (rhs.dim != dim) {
        throw DimensionError("dense operator dimensions differ");
    }
    DenseOperator out;
    out.dim = dim;
    out.entries.assign(dim * dim, Complex{});
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            Complex acc{};
            for (std::size_t k = 0; k < dim; ++k) {
                acc += at(r, k) * rhs.at(k, c);
            }
            out.entries[r * dim + c] = acc;
        }
    }
    return out;
}

std::vector<Complex> DenseOperator::apply(const std::vector<Complex> &v) const {
    std::vector<Complex> out(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            out[r] += at(r, c) * v[c];
        }
    }
    return out;
}

DenseOperator dense_ry(std::size_t n_qubits, std::size_t qubit, double theta) {
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    const Block ry{Complex{c}, Complex{-s}, Complex{s}, Complex{c}};
    const Block id{Complex{1.0}, Complex{}, Complex{}, Complex{1.0}};
    DenseOperator out = from_block(qubit == 0 ? ry : id);
    for (std::size_t q = 1; q < n_qubits; ++q) {
        out = kron(out, from_block(q == qubit ? ry : id));
    }
    return out;
}

DenseOperator dense_cnot(std::size_t n_qubits, std::size_t control, std::size_t target) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    DenseOperator out;
    out.dim = dim;
    out.entries.assign(dim * dim, Complex{});
    for (std::size_t col = 0; col < dim; ++col) {
        // Bit of qubit q counted from the most significant end.
        const bool c_set = ((col >> (n_qubits - 1 - control)) & 1U) != 0;
        const std::size_t row = c_set ? col ^ (std::size_t{1} << (n_qubits - 1 - target)) : col;
        out.entries[row * dim + col] = 1.0;
    }
    return out;
}

DenseOperator dense_circuit(const quantum::CircuitSpec &spec, std::span<const double> inputs) {
    const std::size_t n = spec.n_qubits;
    DenseOperator u = DenseOperator::identity(std::size_t{1} << n);
    auto then = [&u](const DenseOperator &gate) { u = gate.compose(u); };
    for (std::size_t q = 0; q < n; ++q) {
        then(dense_ry(n, q, inputs[q]));
    }
    for (std::size_t layer = 0; layer < spec.n_layers; ++layer) {
        for (std::size_t q = 0; q < n; ++q) {
            then(dense_ry(n, q, spec.theta[layer * n + q]));
        }
        if (n == 2) {
            then(dense_cnot(n, 0, 1));
        } else if (n > 2) {
            for (std::size_t q = 0; q < n; ++q) {
                then(dense_cnot(n, q, (q + 1) % n));
            }
        }
    }
    return u;
}

std::vector<Complex> dense_circuit_state(const quantum::CircuitSpec &spec,
                                         std::span<const double> inputs) {
    std::vector<Complex> zero(std::size_t{1} << spec.n_qubits);
    zero[0] = 1.0;
    return dense_circuit(spec, inputs).apply(zero);
}

double dense_expectation_z(const std::vector<Complex> &amps, std::size_t n_qubits,
                           std::size_t qubit) {
    double e = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const bool set = ((i >> (n_qubits - 1 - qubit)) & 1U) != 0;
        e += (set ? -1.0 : 1.0) * std::norm(amps[i]);
    }
    return e;
}

std::vector<double> naive_matmul(std::span<const double> a, std::span<const double> b,
                                 std::size_t m, std::size_t k, std::size_t n) {
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                acc += a[i * k + p] * b[p * n + j];
            }
            out[i * n + j] = acc;
        }
    }
    return out;
}

std::vector<double> naive_conv2d(std::span<const double> x, std::size_t batch,
                                 std::size_t channels, std::size_t height, std::size_t width,
                                 std::span<const double> kernel, std::size_t filters,
                                 std::size_t k, std::span<const double> bias, std::size_t stride,
                                 std::size_t padding) {
    const std::size_t oh = (height + 2 * padding - k) / stride + 1;
    const std::size_t ow = (width + 2 * padding - k) / stride + 1;
    std::vector<double> out(batch * filters * oh * ow, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t f = 0; f < filters; ++f) {
            for (std::size_t y = 0; y < oh; ++y) {
                for (std::size_t xo = 0; xo < ow; ++xo) {
                    double acc = bias.empty() ? 0.0 : bias[f];
                    for (std::size_t c = 0; c < channels; ++c) {
                        for (std::size_t i = 0; i < k; ++i) {
                            for (std::size_t j = 0; j < k; ++j) {
                                const auto yy = static_cast<std::ptrdiff_t>(y * stride + i) -
                                                static_cast<std::ptrdiff_t>(padding);
                                const auto xx = static_cast<std::ptrdiff_t>(xo * stride + j) -
                                                static_cast<std::ptrdiff_t>(padding);
                                if (yy < 0 || xx < 0 || yy >= static_cast<std::ptrdiff_t>(height) ||
                                    xx >= static_cast<std::ptrdiff_t>(width)) {
                                    continue;
                                }
                                acc += x[((b * channels + c) * height + static_cast<std::size_t>(yy)) *
                                             width +
                                         static_cast<std::size_t>(xx)] *
                                       kernel[((f * channels + c) * k + i) * k + j];
                            }
                        }
                    }
                    out[((b * filters + f) * oh + y) * ow + xo] = acc;
                }
            }
        }
    }
    return out;
}

std::vector<double> naive_attention(std::span<const double> q, std::span<const double> k,
                                    std::span<const double> v, std::size_t batch,
                                    std::size_t tokens, std::size_t width, std::size_t heads) {
    const std::size_t dh = width / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<double> out(batch * tokens * width, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t h = 0; h < heads; ++h) {
            for (std::size_t i = 0; i < tokens; ++i) {
                std::vector<double> scores(tokens);
                double max = -INFINITY;
                for (std::size_t j = 0; j < tokens; ++j) {
                    double s = 0.0;
                    for (std::size_t d = 0; d < dh; ++d) {
                        s += q[(b * tokens + i) * width + h * dh + d] *
                             k[(b * tokens + j) * width + h * dh + d];
                    }
                    scores[j] = s * scale;
                    max = std::max(max, scores[j]);
                }
                double z = 0.0;
                for (double &s : scores) {
                    s = std::exp(s - max);
                    z += s;
                }
                for (std::size_t d = 0; d < dh; ++d) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < tokens; ++j) {
                        acc += scores[j] / z * v[(b * tokens + j) * width + h * dh + d];
                    }
                    out[(b * tokens + i) * width + h * dh + d] = acc;
                }
            }
        }
    }
    return out;
}

long double erf_series(long double x) {
    long double term = x; // (-1)^n x^(2n+1) / n!
    long double sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x * x / static_cast<long double>(n);
        const long double contrib = term / static_cast<long double>(2 * n + 1);
        sum += contrib;
        if (std::fabs(contrib) < 1e-30L) {
            break;
        }
    }
    return 2.0L / std::sqrt(std::numbers::pi_v<long double>) * sum;
}

double gelu_reference(double x) {
    if (x > 6.0) {
        return x;
    }
    if (x < -6.0) {
        return 0.0;
    }
    const long double phi = 0.5L * (1.0L + erf_series(static_cast<long double>(x) /
                                                      std::sqrt(2.0L)));
    return static_cast<double>(static_cast<long double>(x) * phi);
}

} // namespace qviton::verify
