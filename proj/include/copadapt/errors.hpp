#pragma once

#include <stdexcept>
#include <string>

namespace copadapt {

// Root of every error thrown by the library. The CLI maps the concrete
// subclasses onto distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A model parameter lies outside its family's domain.
class ParameterDomainError : public Error {
public:
    using Error::Error;
};

// An evaluation point lies outside the function's support.
class DomainError : public Error {
public:
    using Error::Error;
};

// Vector lengths disagree (covariates vs coefficients, etc.).
class ShapeError : public Error {
public:
    using Error::Error;
};

// A documented precondition does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Iterative routine failed or produced NaN.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Configuration document or flag combination is invalid.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace copadapt
