#pragma once

#include <stdexcept>
#include <string>

namespace neurons {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class StateError : public Error {
public:
    using Error::Error;
};

class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Raised when a training loop encounters a non-finite loss.
class NumericError : public Error {
public:
    using Error::Error;
};

inline void require_shape(bool ok, const std::string& what) {
    if (!ok) throw ShapeError("shape mismatch: " + what);
}

}  // namespace neurons
