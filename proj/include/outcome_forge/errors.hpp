#pragma once

#include <stdexcept>
#include <string>

namespace outcome_forge {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Header or column layout does not match the feature schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A data row could not be parsed; carries the 1-based data row number.
class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& message)
        : Error("row " + std::to_string(row) + ": " + message), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Non-finite values or otherwise unusable numeric input.
class DataError : public Error {
public:
    using Error::Error;
};

/// Dimension mismatch between a model or matrix and its input.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Only one class present where two are required.
class ImbalanceError : public Error {
public:
    using Error::Error;
};

/// Too few rows of a class to run the requested procedure.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Invalid cross-validation plan request.
class PlanError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (hyperparameters, resample settings, search bounds).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The experiment cannot be run on the given data (e.g. single-class cohort).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

}  // namespace outcome_forge
