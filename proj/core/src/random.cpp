// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qviton/error.hpp"

namespace qviton {

std::uint64_t uniform_index(Rng &rng, std::uint64_t n) {
    if (n == 0) {
        throw ContractError("uniform_index over an empty range");
    }
    const std::uint64_t limit = Rng::max() - Rng::max() % n;
    std::uint64_t draw = rng();
    while (draw >= limit) {
        draw = rng();
    }
    return draw % n;
}

double standard_normal(Rng &rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) {
        u1 = uniform01(rng);
    }
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double truncated_normal(Rng &rng, double std) {
    double z = standard_normal(rng);
    while (std::abs(z) > 2.0) {
        z = standard_normal(rng);
    }
    return z * std;
}

std::string rng_state(const Rng &rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

void set_rng_state(Rng &rng, const std::string &state) {
    std::istringstream is(state);
    is >> rng;
    if (is.fail()) {
        throw IoError("malformed RNG state");
    }
}

} // namespace qviton
