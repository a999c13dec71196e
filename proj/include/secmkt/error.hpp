#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace secmkt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input that parses but breaks a data invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Precondition of an operation does not hold (e.g. LODF requested for a radial line).
class DomainError : public Error {
public:
    using Error::Error;
};

enum class SolveStatus { optimal, feasible, infeasible, unbounded, limit_reached, error };

const char* to_string(SolveStatus status);

class SolverError : public Error {
public:
    SolverError(const std::string& what, SolveStatus status) : Error(what), status_(status) {}
    SolveStatus status() const { return status_; }

private:
    SolveStatus status_;
};

/// Raised when out-of-market corrections cannot make a schedule N-1 reliable.
class OmcInfeasible : public Error {
public:
    OmcInfeasible(const std::string& what, std::vector<std::string> violating)
        : Error(what), violating_(std::move(violating)) {}
    const std::vector<std::string>& violating_scenarios() const { return violating_; }

private:
    std::vector<std::string> violating_;
};

}  // namespace secmkt
