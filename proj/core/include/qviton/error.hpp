// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace qviton {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Tensor extents or widths do not agree.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// Index (qubit, label, band, token) outside its valid range.
class IndexError : public Error {
  public:
    using Error::Error;
};

/// Invalid configuration value (ratios, probabilities, hyperparameters).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A documented precondition of an operation was violated by the caller.
class ContractError : public Error {
  public:
    using Error::Error;
};

/// Non-finite loss or gradient detected during optimization.
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Filesystem or format failure.
class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace qviton
