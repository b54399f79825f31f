#pragma once

#include <stdexcept>
#include <string>

namespace igflow {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point (or a finite-difference stencil around it) lies outside the open domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A Hessian failed the positive-definiteness test.
class ConvexityError : public Error {
public:
    using Error::Error;
};

class NonConvergenceError : public Error {
public:
    using Error::Error;
};

/// eta^2 is too small for -d ln(eta^2) to be meaningful.
class SingularWeylError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

class InsufficientSamplesError : public Error {
public:
    using Error::Error;
};

class DivisionByZeroError : public Error {
public:
    using Error::Error;
};

/// A point tagged with the wrong chart, or a dimension mismatch.
class ChartError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace igflow
