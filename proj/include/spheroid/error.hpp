#pragma once

#include <stdexcept>
#include <string>

namespace spheroid {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the domain an operation is defined on (unknown rate,
// concentration far outside the validity interval, bad grid size, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

// Non-finite values or a singular linear system.
class NumericError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string key, int line = 0)
        : Error(what), key_(std::move(key)), line_(line) {}
    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Snapshot version, grid or checksum mismatch.
class FormatError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

} // namespace spheroid
