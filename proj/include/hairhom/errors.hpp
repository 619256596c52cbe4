#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hairhom {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid inputs (scenario invariants, config values). Collects every
/// violated invariant, not just the first one.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> issues)
        : Error(join(issues)), issues_(std::move(issues)) {}
    explicit ValidationError(const std::string& issue)
        : ValidationError(std::vector<std::string>{issue}) {}

    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out = "validation failed:";
        for (const auto& s : issues) {
            out += "\n  - ";
            out += s;
        }
        return out;
    }
    std::vector<std::string> issues_;
};

class ConfigParseError : public Error {
public:
    ConfigParseError(const std::string& file, int line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Linear/nonlinear solver failure. Carries the residual that was actually
/// achieved and, for iterative loops, the trailing residual history.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual_achieved,
                std::vector<double> history = {})
        : Error(what + " (residual " + std::to_string(residual_achieved) + ")"),
          residual_achieved_(residual_achieved), history_(std::move(history)) {}

    double residual_achieved() const { return residual_achieved_; }
    const std::vector<double>& history() const { return history_; }

private:
    double residual_achieved_;
    std::vector<double> history_;
};

/// Evaluation point outside the admissible domain (inside a hair, outside an
/// annulus, at the cell-problem singularity).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inconsistent geometry (hair wider than its cell, degenerate annulus).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Operation applied to a solution of the wrong run mode.
class ModeError : public Error {
public:
    using Error::Error;
};

} // namespace hairhom
