#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fremond {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NewtonDiverged : public Error {
public:
    using Error::Error;
};

class PositivityLost : public Error {
public:
    using Error::Error;
};

class FixedPointDiverged : public Error {
public:
    using Error::Error;
};

class NonpositiveTemperature : public Error {
public:
    using Error::Error;
};

class ValidationFailed : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A solver error raised at a known step of a run; kind names the original error class.
class SolverFailure : public Error {
public:
    SolverFailure(std::size_t step, std::string kind, const std::string& message)
        : Error("step " + std::to_string(step) + ": " + kind + ": " + message), step_(step), kind_(std::move(kind))
    {
    }
    std::size_t step() const { return step_; }
    const std::string& kind() const { return kind_; }

private:
    std::size_t step_;
    std::string kind_;
};

} // namespace fremond
