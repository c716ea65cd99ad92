#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hal {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a configuration or data file fails validation; carries the
// offending key so callers can report it.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    [[nodiscard]] auto field() const -> const std::string& { return field_; }

private:
    std::string field_;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class NonFiniteError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

class ChecksumError : public Error {
public:
    using Error::Error;
};

}    // namespace hal
