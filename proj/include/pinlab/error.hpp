#pragma once

#include <stdexcept>
#include <string>

namespace pinlab {

// Base for all recoverable errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDistribution : public Error {
public:
    using Error::Error;
};

class InvalidGeometry : public Error {
public:
    using Error::Error;
};

class InvalidRateFunction : public Error {
public:
    using Error::Error;
};

class PreconditionViolation : public Error {
public:
    using Error::Error;
};

class NumericalBlowup : public Error {
public:
    using Error::Error;
};

class AssemblyError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// The tail probe never reached the requested level on the searched grid.
class HypothesisNotWitnessed : public Error {
public:
    HypothesisNotWitnessed(const std::string& what, double largest_probe)
        : Error(what), largest_probe_(largest_probe) {}

    double largest_probe() const noexcept { return largest_probe_; }

private:
    double largest_probe_;
};

}  // namespace pinlab
