#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cwcu {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Cholesky factorization hit a non-positive pivot.
class NotHPD : public Error {
public:
    using Error::Error;
};

class Singular : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

/// A component cannot be de-biased (alpha too small or singular).
class DegenerateComponent : public Error {
public:
    DegenerateComponent(std::size_t component, const std::string& what)
        : Error("component " + std::to_string(component) + ": " + what), component_(component) {}

    std::size_t component() const noexcept { return component_; }

private:
    std::size_t component_;
};

/// Model assumptions violated (improper noise, non-zero-mean alphabet, ...).
class ModelError : public Error {
public:
    using Error::Error;
};

class BadSpec : public Error {
public:
    using Error::Error;
};

/// Unreadable or malformed input file / configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace cwcu
