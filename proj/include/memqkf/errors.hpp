#pragma once

#include <stdexcept>
#include <string>

namespace memqkf {

/// Base class for all recoverable failures raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyMeasurementSet : public Error {
public:
    EmptyMeasurementSet() : Error("measurement set is empty") {}
};

/// Kinematic innovation covariance is singular or too badly conditioned to solve.
class SingularInnovation : public Error {
public:
    using Error::Error;
};

/// Pseudo-measurement covariance (axis or orientation) cannot be inverted.
class SingularPseudoCov : public Error {
public:
    using Error::Error;
};

/// Information-form orientation update with a zero prior variance.
class DegenerateInformation : public Error {
public:
    DegenerateInformation() : Error("orientation prior variance is zero; information form undefined") {}
};

class NotPSD : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace memqkf
