#pragma once

#include <stdexcept>
#include <string>

namespace imdpv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Invalid arguments or data: dimension mismatches, schema violations,
/// empty datasets (CLI exit code 3).
class InputError : public Error {
public:
    using Error::Error;
};

/// A numeric routine failed or produced a non-finite value (CLI exit code 4).
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace imdpv
