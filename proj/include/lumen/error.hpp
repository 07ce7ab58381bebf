#pragma once

#include <stdexcept>
#include <string>

namespace lumen {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Input bytes or documents do not follow the expected format.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Two operands disagree on their spatial or channel dimensions.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A value violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace lumen
