#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gridad {

/// Base of every error raised by the library. `exit_code()` maps the error
/// family onto the CLI convention (1 usage, 2 data, 3 numerical).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 2; }
};

class UsageError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 1; }
};

class DataError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// The network (or a measurement plan over it) does not determine the state.
class ObservabilityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An iterative solver hit its iteration cap. Carries the last mismatch and,
/// when the solver has one, the last iterate.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, double last_mismatch,
                    std::vector<double> last_iterate = {})
        : NumericalError(what), last_mismatch_(last_mismatch), last_iterate_(std::move(last_iterate)) {}
    double last_mismatch() const noexcept { return last_mismatch_; }
    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
    double last_mismatch_;
    std::vector<double> last_iterate_;
};

}  // namespace gridad
