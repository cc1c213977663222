#pragma once

#include <stdexcept>
#include <string>

namespace fcb {

/// Root of every error the harness raises. Callers that only need a message
/// catch this; stage drivers catch the narrower types to decide whether a
/// failure is per-cell or fatal.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed manifest / table / config input. `row` is 1-based, 0 when the
/// failure is not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row = 0)
        : Error(row ? what + " (row " + std::to_string(row) + ")" : what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class CodecError : public Error {
public:
    using Error::Error;
};

class DecodeError : public CodecError {
public:
    using CodecError::CodecError;
};

class BudgetInfeasible : public CodecError {
public:
    using CodecError::CodecError;
};

class PluginError : public Error {
public:
    using Error::Error;
};

/// Zero-norm or dimension-mismatched embeddings.
class SimilarityError : public Error {
public:
    using Error::Error;
};

/// More distinct samples requested than exist.
class SampleError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class MissingArtifact : public Error {
public:
    using Error::Error;
};

}  // namespace fcb
