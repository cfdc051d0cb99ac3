// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/quantum.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "qviton/error.hpp"

namespace qviton::quantum {

namespace {

constexpr std::size_t kMaxQubits = 20;

std::atomic<std::uint64_t> evaluation_counter{0};

} // namespace

StateVector::StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits == 0 || n_qubits > kMaxQubits) {
        throw ConfigError("StateVector: qubit count must lie in [1, " +
                          std::to_string(kMaxQubits) + "], got " + std::to_string(n_qubits));
    }
    amps_.assign(std::size_t{1} << n_qubits, {0.0, 0.0});
    amps_[0] = 1.0;
}

StateVector StateVector::basis(std::size_t n_qubits, std::size_t index) {
    StateVector s(n_qubits);
    if (index >= s.dimension()) {
        throw IndexError("basis index " + std::to_string(index) + " out of range");
    }
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
}

StateVector StateVector::from_amplitudes(std::vector<std::complex<double>> amplitudes) {
    const std::size_t dim = amplitudes.size();
    if (dim < 2 || (dim & (dim - 1)) != 0) {
        throw DimensionError("amplitude count " + std::to_string(dim) +
                             " is not a power of two");
    }
    StateVector s(static_cast<std::size_t>(std::countr_zero(dim)));
    s.amps_ = std::move(amplitudes);
    return s;
}

std::size_t StateVector::mask(std::size_t qubit) const {
    if (qubit >= n_qubits_) {
        throw IndexError("qubit " + std::to_string(qubit) + " out of range for " +
                         std::to_string(n_qubits_) + "-qubit register");
    }
    return std::size_t{1} << (n_qubits_ - 1 - qubit);
}

double StateVector::norm_squared() const {
    double total = 0.0;
    for (const auto &a : amps_) {
        total += std::norm(a);
    }
    return total;
}

void apply_ry(StateVector &state, std::size_t qubit, double theta) {
    const std::size_t m = state.mask(qubit);
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    auto &amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & m) {
            continue;
        }
        const std::complex<double> a0 = amps[i];
        const std::complex<double> a1 = amps[i | m];
        amps[i] = c * a0 - s * a1;
        amps[i | m] = s * a0 + c * a1;
    }
}

void apply_cnot(StateVector &state, std::size_t control, std::size_t target) {
    if (control == target) {
        throw ContractError("CNOT control and target must differ (both " +
                            std::to_string(control) + ")");
    }
    const std::size_t cm = state.mask(control);
    const std::size_t tm = state.mask(target);
    auto &amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & cm) && !(i & tm)) {
            std::swap(amps[i], amps[i | tm]);
        }
    }
}

double expectation_z(const StateVector &state, std::size_t qubit) {
    const std::size_t m = state.mask(qubit);
    const double norm = state.norm_squared();
    if (std::abs(norm - 1.0) > 1e-6) {
        throw ContractError("expectation of an unnormalized state (norm^2 = " +
                            std::to_string(norm) + ")");
    }
    double e = 0.0;
    const auto &amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        e += (i & m) ? -std::norm(amps[i]) : std::norm(amps[i]);
    }
    return e;
}

void CircuitSpec::validate() const {
    if (n_qubits == 0 || n_qubits > kMaxQubits) {
        throw ConfigError("circuit qubit count must lie in [1, " + std::to_string(kMaxQubits) +
                          "]");
    }
    if (theta.size() != n_parameters()) {
        throw ConfigError("circuit expects " + std::to_string(n_parameters()) +
                          " trainable angles, got " + std::to_string(theta.size()));
    }
    for (double t : theta) {
        if (!std::isfinite(t)) {
            throw ConfigError("circuit angle is not finite");
        }
    }
    if (observable_qubit >= n_qubits) {
        throw ConfigError("observable qubit " + std::to_string(observable_qubit) +
                          " out of range");
    }
}

std::vector<std::pair<std::size_t, std::size_t>> ring_pairs(std::size_t n_qubits) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (n_qubits == 2) {
        pairs.emplace_back(0, 1);
    } else if (n_qubits > 2) {
        for (std::size_t q = 0; q < n_qubits; ++q) {
            pairs.emplace_back(q, (q + 1) % n_qubits);
        }
    }
    return pairs;
}

StateVector run_circuit(const CircuitSpec &spec, std::span<const double> input_angles) {
    if (input_angles.size() != spec.n_qubits) {
        throw ContractError("circuit expects " + std::to_string(spec.n_qubits) +
                            " input angles, got " + std::to_string(input_angles.size()));
    }
    if (spec.theta.size() != spec.n_parameters()) {
        throw ConfigError("circuit expects " + std::to_string(spec.n_parameters()) +
                          " trainable angles, got " + std::to_string(spec.theta.size()));
    }
    evaluation_counter.fetch_add(1, std::memory_order_relaxed);
    StateVector state(spec.n_qubits);
    for (std::size_t q = 0; q < spec.n_qubits; ++q) {
        apply_ry(state, q, input_angles[q]);
    }
    const auto ring = ring_pairs(spec.n_qubits);
    for (std::size_t layer = 0; layer < spec.n_layers; ++layer) {
        for (std::size_t q = 0; q < spec.n_qubits; ++q) {
            apply_ry(state, q, spec.theta[layer * spec.n_qubits + q]);
        }
        for (const auto &[c, t] : ring) {
            apply_cnot(state, c, t);
        }
    }
    return state;
}

double circuit_expectation(const CircuitSpec &spec, std::span<const double> input_angles) {
    return expectation_z(run_circuit(spec, input_angles), spec.observable_qubit);
}

CircuitGradient parameter_shift_grad(const CircuitSpec &spec,
                                     std::span<const double> input_angles) {
    constexpr double shift = std::numbers::pi / 2.0;
    CircuitGradient out;
    out.value = circuit_expectation(spec, input_angles);

    std::vector<double> inputs(input_angles.begin(), input_angles.end());
    out.d_inputs.resize(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const double saved = inputs[i];
        inputs[i] = saved + shift;
        const double plus = circuit_expectation(spec, inputs);
        inputs[i] = saved - shift;
        const double minus = circuit_expectation(spec, inputs);
        inputs[i] = saved;
        out.d_inputs[i] = 0.5 * (plus - minus);
    }

    CircuitSpec shifted = spec;
    out.d_theta.resize(spec.theta.size());
    for (std::size_t i = 0; i < spec.theta.size(); ++i) {
        shifted.theta[i] = spec.theta[i] + shift;
        const double plus = circuit_expectation(shifted, inputs);
        shifted.theta[i] = spec.theta[i] - shift;
        const double minus = circuit_expectation(shifted, inputs);
        shifted.theta[i] = spec.theta[i];
        out.d_theta[i] = 0.5 * (plus - minus);
    }
    return out;
}

std::uint64_t circuit_evaluations() {
    return evaluation_counter.load(std::memory_order_relaxed);
}

void reset_circuit_evaluations() { evaluation_counter.store(0, std::memory_order_relaxed); }

} // namespace qviton::quantum
