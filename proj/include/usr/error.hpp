#pragma once

#include <stdexcept>
#include <string>

namespace usr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression tree (arity mismatch, unknown column reference).
class StructureError : public Error {
public:
    using Error::Error;
};

/// Input table problems: unreadable file, bad header, non-numeric cell, ragged rows.
class DataError : public Error {
public:
    using Error::Error;
};

/// Invalid run or experiment configuration. The message names the offending field.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : Error(field + ": " + what)
        , field_(field)
    {
    }

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace usr
