#pragma once

#include <stdexcept>
#include <string>

namespace siqr {

// Base class for every error thrown by the workbench.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Invalid parameter, scenario field, or matrix property. Carries the name of
// the offending field.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Scenario config key that is not part of the schema.
class UnknownKeyError : public ValidationError {
public:
    explicit UnknownKeyError(const std::string& key)
        : ValidationError(key, "unknown config key: " + key) {}
};

// Malformed scenario file. line is 1-based; 0 when unknown.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& message)
        : Error("parse error at line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

class IoError : public Error {
public:
    IoError(std::string path, const std::string& message)
        : Error(message + ": " + path), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Matrix dimensions that do not conform to an operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Numerical failure: non-finite derivative, root iteration cap, residual out
// of bounds, singular weight matrix.
class NumericError : public Error {
public:
    using Error::Error;
};

// A Riccati solution grid that does not cover the requested simulation horizon.
class GridCoverageError : public Error {
public:
    GridCoverageError(double horizon, const std::string& message)
        : Error(message), horizon_(horizon) {}
    double horizon() const noexcept { return horizon_; }

private:
    double horizon_;
};

} // namespace siqr
