#pragma once

#include <stdexcept>
#include <string>

namespace dvz {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (l_k >= 1, t outside (0, 1/2], ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Violated geometric precondition, e.g. points closer than the separation a formula assumes.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Rejection sampler could not populate a region.
class RegionError : public Error {
public:
    using Error::Error;
};

// Bad user configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace dvz
