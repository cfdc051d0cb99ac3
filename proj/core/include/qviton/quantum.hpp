// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file
 * Exact (noiseless) statevector simulation of the RY/CNOT patch circuit.
 *
 * Qubit 0 is the most significant bit of a basis index, so |1000> has only
 * qubit 0 set and its amplitude lives at index 8 of a 4-qubit register.
 */

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace qviton::quantum {

class StateVector {
  public:
    /// |0...0> on `n_qubits` qubits.
    explicit StateVector(std::size_t n_qubits);

    /// Computational basis state |index>.
    static StateVector basis(std::size_t n_qubits, std::size_t index);
    static StateVector from_amplitudes(std::vector<std::complex<double>> amplitudes);

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] std::size_t dimension() const { return amps_.size(); }
    [[nodiscard]] const std::vector<std::complex<double>> &amplitudes() const { return amps_; }
    [[nodiscard]] std::vector<std::complex<double>> &amplitudes() { return amps_; }

    /// Basis-index mask of `qubit` (IndexError when out of range).
    [[nodiscard]] std::size_t mask(std::size_t qubit) const;

    /// Sum of squared magnitudes.
    [[nodiscard]] double norm_squared() const;

  private:
    std::size_t n_qubits_;
    std::vector<std::complex<double>> amps_;
};

/// RY(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]] on `qubit`.
void apply_ry(StateVector &state, std::size_t qubit, double theta);

/// Flips `target` on basis states whose `control` bit is set.
void apply_cnot(StateVector &state, std::size_t control, std::size_t target);

/// <Z> on `qubit`; ContractError when the state norm is off by more than 1e-6.
double expectation_z(const StateVector &state, std::size_t qubit);
inline double expectation_z0(const StateVector &state) { return expectation_z(state, 0); }

/// Patch-circuit layout: one RY encoding gate per qubit, then `n_layers`
/// rounds of per-qubit trainable RY followed by a CNOT ring.
struct CircuitSpec {
    std::size_t n_qubits = 4;
    std::size_t n_layers = 2;
    std::vector<double> theta; // n_qubits * n_layers, layer-major
    std::size_t observable_qubit = 0;

    [[nodiscard]] std::size_t n_parameters() const { return n_qubits * n_layers; }
    /// Throws ConfigError when the layout or angles are invalid.
    void validate() const;
};

/// CNOT pairs of one entangling ring: (0,1), (1,2), ..., (n-1,0). Two qubits
/// use the single pair (0,1); one qubit has no entangler.
std::vector<std::pair<std::size_t, std::size_t>> ring_pairs(std::size_t n_qubits);

/// Evolves |0...0> through the circuit; `input_angles` feed the encoding
/// RYs (the encoder keeps them in [0, pi]).
StateVector run_circuit(const CircuitSpec &spec, std::span<const double> input_angles);

/// <Z> on the configured observable qubit after run_circuit.
double circuit_expectation(const CircuitSpec &spec, std::span<const double> input_angles);

struct CircuitGradient {
    double value = 0.0;
    std::vector<double> d_inputs; // d<Z>/d input angle
    std::vector<double> d_theta;  // d<Z>/d trainable angle
};

/// Parameter-shift gradient: [E(a + pi/2) - E(a - pi/2)] / 2 for every
/// encoding and trainable angle (two circuit runs each).
CircuitGradient parameter_shift_grad(const CircuitSpec &spec,
                                     std::span<const double> input_angles);

/// Number of run_circuit calls since the last reset, across all threads.
std::uint64_t circuit_evaluations();
void reset_circuit_evaluations();

} // namespace qviton::quantum
