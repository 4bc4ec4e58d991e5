#pragma once

#include <stdexcept>
#include <string>

namespace sblue {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Cholesky failed even after the jitter ladder was exhausted.
struct FactorizationError : Error {
    using Error::Error;
};

// Doubling the node count moved a quadrature result by more than abs_tol.
struct QuadratureNotConverged : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// Config file could not be parsed at all.
struct ParseError : Error {
    using Error::Error;
};

// Config parsed but a field failed validation; message names the field path.
struct ValidationError : Error {
    using Error::Error;
};

// CSV row violated the sensor schema; message carries the line number.
struct SchemaError : Error {
    using Error::Error;
};

struct DuplicateId : Error {
    using Error::Error;
};

// Exhaustive enumeration refused: instance exceeds the 2^N bound.
struct TooLarge : Error {
    using Error::Error;
};

// Selection problem cannot be satisfied even with every sensor active.
struct Infeasible : Error {
    using Error::Error;
};

// Importance-sampling effective sample size collapsed.
struct DegenerateWeights : Error {
    using Error::Error;
};

}  // namespace sblue
