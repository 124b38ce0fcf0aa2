// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace eitsim {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A physical parameter or argument is out of its valid domain.
class InvalidParameterError : public Error {
public:
    using Error::Error;
};

/// A density matrix (or packed state) violates its invariants.
class StateValidityError : public Error {
public:
    using Error::Error;
};

/// The ODE integrator could not continue (step-size underflow).
class IntegrationFailureError : public Error {
public:
    IntegrationFailureError(const std::string& msg, double last_good_t)
        : Error(msg), last_good_t_us(last_good_t) {}
    double last_good_t_us;
};

/// An iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A spectral feature required by an extraction routine is absent.
class FeatureNotFoundError : public Error {
public:
    using Error::Error;
};

/// A spectral feature exists but is unusable (e.g. touches the grid edge).
class IllPosedFeatureError : public Error {
public:
    using Error::Error;
};

/// Malformed or invalid input data (spectra, fit problems).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// Configuration file problem; carries the offending key and line.
class ConfigError : public Error {
public:
    ConfigError(const std::string& msg, std::string key_, int line_)
        : Error(msg), key(std::move(key_)), line(line_) {}
    std::string key;
    int line;
};

} // namespace eitsim
