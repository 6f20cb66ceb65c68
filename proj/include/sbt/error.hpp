#pragma once

#include <stdexcept>
#include <string>

namespace sbt {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value violates a documented invariant. field() names the offender.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// Backaction occupancy requested at (near) zero detuning.
class DegenerateDetuningError : public Error {
public:
    using Error::Error;
};

// The spectrum carries no resolvable Lorentzian inside the fit window.
class DegenerateFitError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Fitted quantities contradict the calibrated parameter set.
class CalibrationError : public Error {
public:
    using Error::Error;
};

class ExtrapolationError : public Error {
public:
    using Error::Error;
};

// Objective does not depend on the parameter being fitted.
class FlatObjectiveError : public Error {
public:
    using Error::Error;
};

}  // namespace sbt
