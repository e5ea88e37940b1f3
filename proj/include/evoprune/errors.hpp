#pragma once

#include <stdexcept>
#include <string>

namespace evoprune {

/// Bad argument to a generator or operator (empty range, out-of-bounds size).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inconsistent run configuration: unknown keys, neuron counts, seed overlap.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A maze that violates the generator contract (e.g. no free start cell).
class MazeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or version-mismatched file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace evoprune
