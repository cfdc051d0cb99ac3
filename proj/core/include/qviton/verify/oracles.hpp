// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file
 * Brute-force reference implementations. They share no code with the
 * optimized paths they check.
 */

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qviton/quantum.hpp"

namespace qviton::verify {

using Complex = std::complex<double>;

/// Row-major square complex matrix of side 2^n.
struct DenseOperator {
    std::size_t dim = 0;
    std::vector<Complex> entries;

    static DenseOperator identity(std::size_t dim);
    [[nodiscard]] Complex at(std::size_t r, std::size_t c) const { return entries[r * dim + c]; }
    /// this * rhs
    [[nodiscard]] DenseOperator compose(const DenseOperator &rhs) const;
    [[nodiscard]] std::vector<Complex> apply(const std::vector<Complex> &v) const;
};

/// Full-register RY on `qubit` (qubit 0 = most significant), built by
/// Kronecker products of 2x2 blocks.
DenseOperator dense_ry(std::size_t n_qubits, std::size_t qubit, double theta);
/// Full-register CNOT as a permutation matrix.
DenseOperator dense_cnot(std::size_t n_qubits, std::size_t control, std::size_t target);

/// Product of every gate of the circuit as one dense unitary.
DenseOperator dense_circuit(const quantum::CircuitSpec &spec, std::span<const double> inputs);

/// Final amplitudes from the dense unitary applied to |0...0>.
std::vector<Complex> dense_circuit_state(const quantum::CircuitSpec &spec,
                                         std::span<const double> inputs);

/// <Z_q> of an amplitude vector by explicit diagonal sum.
double dense_expectation_z(const std::vector<Complex> &amps, std::size_t n_qubits,
                           std::size_t qubit);

/// [M,K] x [K,N] by triple loop.
std::vector<double> naive_matmul(std::span<const double> a, std::span<const double> b,
                                 std::size_t m, std::size_t k, std::size_t n);

/// NCHW cross-correlation by direct summation.
std::vector<double> naive_conv2d(std::span<const double> x, std::size_t batch,
                                 std::size_t channels, std::size_t height, std::size_t width,
                                 std::span<const double> kernel, std::size_t filters,
                                 std::size_t k, std::span<const double> bias, std::size_t stride,
                                 std::size_t padding);

/// Per-head loop attention over [B,T,D] inputs, heads as column blocks.
std::vector<double> naive_attention(std::span<const double> q, std::span<const double> k,
                                    std::span<const double> v, std::size_t batch,
                                    std::size_t tokens, std::size_t width, std::size_t heads);

/// erf by its Maclaurin series in long double (|x| <= 4).
long double erf_series(long double x);
/// x * Phi(x) via erf_series.
double gelu_reference(double x);

} // namespace qviton::verify
