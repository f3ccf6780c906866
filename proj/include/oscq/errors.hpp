#pragma once

#include <stdexcept>
#include <string>

#include "oscq/linalg.hpp"

namespace oscq {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model evaluation produced a non-finite value or was asked to evaluate
/// outside its domain. Carries the offending state.
class ModelDomainError : public Error {
public:
    ModelDomainError(const std::string& what, Vector state)
        : Error(what), state_(std::move(state)) {}
    const Vector& state() const { return state_; }

private:
    Vector state_;
};

/// Bad parameter name or value.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A step or propagation matrix was numerically singular. For this toolkit
/// that means C = dq/dx is degenerate (index >= 1 DAE) or the step is too large.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, long step_index)
        : Error(what), step_index_(step_index) {}
    long step_index() const { return step_index_; }

private:
    long step_index_;
};

/// Newton failed to converge on an implicit integration step.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, double time, Vector iterate)
        : Error(what), time_(time), iterate_(std::move(iterate)) {}
    double time() const { return time_; }
    const Vector& iterate() const { return iterate_; }

private:
    double time_;
    Vector iterate_;
};

/// Periodic steady-state search failed.
class PssError : public Error {
public:
    enum class Kind {
        Diverged,
        Degenerate,       // near-singular shooting Jacobian: conservative orbit family
        ConstantSolution, // converged onto an equilibrium
        NoOscillation,    // no repeated section crossings
    };
    PssError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// QR iteration did not converge.
class EigenError : public Error {
public:
    using Error::Error;
};

/// Errors from the companion analyses (perturbation fit, power balance, ...).
class AnalysisError : public Error {
public:
    using Error::Error;
};

} // namespace oscq
