// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file
 * Oracle and finite-difference verification suites, shared by the test
 * binaries and the `gradcheck` command.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qviton::verify {

enum class Scope { Numerics, Quantum, Quanv, Vit, Model, All };
std::string to_string(Scope scope);
Scope scope_from_string(const std::string &name);

struct CheckResult {
    std::string scope;
    std::string name;
    double error = 0.0; // worst observed deviation
    double tolerance = 0.0;
    double seconds = 0.0;
    std::string detail; // exception text when the check could not run

    [[nodiscard]] bool passed() const { return error <= tolerance; }
};

std::vector<CheckResult> numerics_checks(std::uint64_t seed);
std::vector<CheckResult> quantum_checks(std::uint64_t seed);
std::vector<CheckResult> quanv_checks(std::uint64_t seed);
std::vector<CheckResult> vit_checks(std::uint64_t seed);
std::vector<CheckResult> model_checks(std::uint64_t seed);

std::vector<CheckResult> run_suite(Scope scope, std::uint64_t seed = 0);

} // namespace qviton::verify
