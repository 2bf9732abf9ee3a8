#pragma once

#include <stdexcept>
#include <string>

namespace modfoot {

/// Base of every error thrown by the library. The CLI maps subclasses onto
/// exit codes, so new failure kinds should derive from one of these.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument values: unknown function id, dimension out of range, etc.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Vector or matrix dimensions do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Value outside the mathematical domain (non-finite input, u at 0 or 1).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Request exceeds a compiled-in table or an enumeration limit.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// File or table content does not match the expected columns or keys.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Internal precondition of a stage was violated by its caller.
class ContractError : public Error {
public:
    using Error::Error;
};

}  // namespace modfoot
