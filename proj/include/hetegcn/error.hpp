#pragma once

#include <stdexcept>
#include <string>

namespace hetegcn {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 1, DataError/ShapeError/DomainError -> 2, TrainError -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad configuration: unknown keys, invalid values, incompatible architectures.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (parse failures, missing files).
class DataError : public Error {
public:
    using Error::Error;
};

/// Dimension mismatch between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Value outside the operation's domain (e.g. negative graph weight).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Failure during optimization (divergence, non-finite loss).
class TrainError : public Error {
public:
    explicit TrainError(const std::string& msg, int epoch = -1)
        : Error(msg), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

} // namespace hetegcn
