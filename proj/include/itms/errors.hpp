#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace itms {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A non-finite or out-of-domain value was passed to a model function.
class DomainError : public Error {
public:
    DomainError(std::string field, const std::string& what)
        : Error(what), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Total coolant flow is zero, the merge node is undefined.
class DegenerateFlowError : public Error {
public:
    using Error::Error;
};

/// State of charge reached zero inside an integration step.
class DepletionError : public Error {
public:
    DepletionError(double time_in_step, const std::string& what)
        : Error(what), time_in_step_(time_in_step) {}
    /// Seconds after the start of the offending step.
    [[nodiscard]] double time_in_step() const noexcept { return time_in_step_; }

private:
    double time_in_step_;
};

/// Integrated state left the simulation sanity band.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t step_index, const std::string& what)
        : Error(what), step_index_(step_index) {}
    [[nodiscard]] std::size_t step_index() const noexcept { return step_index_; }

private:
    std::size_t step_index_;
};

/// Rollout cost became non-finite.
class NumericalBlowupError : public Error {
public:
    NumericalBlowupError(std::size_t step_index, const std::string& what)
        : Error(what), step_index_(step_index) {}
    [[nodiscard]] std::size_t step_index() const noexcept { return step_index_; }

private:
    std::size_t step_index_;
};

/// Box and rate constraints admit no input.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

}  // namespace itms
