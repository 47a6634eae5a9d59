#pragma once

#include <stdexcept>
#include <string>

namespace mgv {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoCalibrationHistory : public Error {
public:
    NoCalibrationHistory() : Error("no correct calibration records in STM") {}
};

class NoApplicableStrategy : public Error {
public:
    NoApplicableStrategy() : Error("no strategy in STM matches the task tags") {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NodeNotOnFrontier : public Error {
public:
    explicit NodeNotOnFrontier(std::size_t node)
        : Error("node " + std::to_string(node) + " is not on the frontier") {}
};

class NonMonotonePolicy : public Error {
public:
    explicit NonMonotonePolicy(std::size_t t)
        : Error("policy column at t=" + std::to_string(t) +
                " is not Stop-below/Search-above; refine the z grid") {}
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Raised when a configuration value fails validation; `field()` names the
/// offending key (dotted path for nested blocks).
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& why)
        : Error("invalid field '" + field + "': " + why), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class MissingFile : public Error {
public:
    explicit MissingFile(const std::string& path) : Error("missing file: " + path) {}
};

}  // namespace mgv
