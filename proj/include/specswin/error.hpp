#pragma once

#include <stdexcept>
#include <string>

namespace specswin {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Bad input data: I/O failures, invariant violations, shape mismatches (exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

class ShapeError : public DataError {
public:
    using DataError::DataError;
};

class RangeError : public DataError {
public:
    using DataError::DataError;
};

/// Loss became non-finite during optimization (exit code 4).
class TrainingDiverged : public Error {
public:
    TrainingDiverged(std::string stage_id, const std::string& what)
        : Error(what), stage_(std::move(stage_id)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace specswin
