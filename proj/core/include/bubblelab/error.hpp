#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bubblelab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition or invariant violated by caller-supplied data.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Iterative solver or quadrature ran out of budget.
class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

}  // namespace bubblelab
