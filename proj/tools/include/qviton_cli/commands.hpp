// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qviton::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitVerificationFailed = 1,
    kExitUsage = 2,
    kExitNumerical = 3,
};

/// Parses `args` (without the program name) and runs the selected command.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace qviton::cli
