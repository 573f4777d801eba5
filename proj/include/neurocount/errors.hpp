#pragma once

#include <stdexcept>
#include <string>

namespace neurocount {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid specs, configs or arguments (bad weights, coincident atoms, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Unreadable or malformed files (bundle sidecars, CSVs, reports).
class FormatError : public Error {
public:
    using Error::Error;
};

// Eigensolver failed to converge; carries the remaining off-diagonal mass.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_ = 0.0;
};

// Quadrature failed to meet its refinement tolerance; carries the last change.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_ = 0.0;
};

// The empirical noise characteristic function vanished at a required lag.
class DeconvolutionError : public Error {
public:
    DeconvolutionError(const std::string& what, int lag)
        : Error(what), lag_(lag) {}
    int lag() const { return lag_; }

private:
    int lag_ = 0;
};

// No matrix order p satisfies the selection condition up to the cap.
class NoAdmissiblePError : public Error {
public:
    using Error::Error;
};

// Not enough usable data (empty detections, silent region too small, ...).
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

}  // namespace neurocount
