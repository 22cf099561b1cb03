#pragma once

#include <stdexcept>
#include <string>

namespace fracmove {

/// Argument outside the mathematical domain of an operator (e.g. beta > 1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Input sizes are inconsistent or too short for the requested stencil.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// A linear or time-stepping solve failed; the message carries diagnostics.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration or geometry.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace fracmove
