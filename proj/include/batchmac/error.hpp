#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace batchmac {

/// Base of all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejected input: parameter records, configuration documents, unsupported
/// model/parameter combinations. The CLI maps these to exit code 1.
class InputError : public Error {
public:
    using Error::Error;
};

/// A parameter record violated one of its invariants. `field()` names the
/// offending field.
class ValidationError : public InputError {
public:
    ValidationError(std::string field, const std::string& what)
        : InputError(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Numerical failure inside a model (e.g. a kernel that leaks mass).
class ModelError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace batchmac
