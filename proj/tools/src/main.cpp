// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "qviton_cli/commands.hpp"

int main(int argc, char **argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return qviton::cli::run_cli(args, std::cout, std::cerr);
}
