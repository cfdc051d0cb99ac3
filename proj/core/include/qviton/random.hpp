// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace qviton {

/// Engine used for every stochastic choice (init, dropout, sampling,
/// augmentation). Its textual state round-trips through checkpoints.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection, independent of the standard
/// library's distribution implementation.
std::uint64_t uniform_index(Rng &rng, std::uint64_t n);

/// Standard normal via Box-Muller on uniform01.
double standard_normal(Rng &rng);

/// Normal(0, std) resampled until it lies within two standard deviations.
double truncated_normal(Rng &rng, double std);

std::string rng_state(const Rng &rng);
void set_rng_state(Rng &rng, const std::string &state);

} // namespace qviton
