#pragma once

#include <stdexcept>
#include <string>

namespace fairmatch {

/// Bad input data: malformed files, violated preconditions on instances.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid request (bad parameters, inconsistent configuration).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A state that should be unreachable; signals a bug in this library.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace fairmatch
