#pragma once

#include <stdexcept>
#include <string>

namespace conemkt {

// Thrown when an input fails structural validation (wrong shape, bad ids,
// non-finite entries). Distinct from domain outcomes such as "matrix violates
// the bid-ask inequalities", which are reported through result structs.
class StructuralError : public std::invalid_argument {
public:
    explicit StructuralError(const std::string& what) : std::invalid_argument(what) {}
};

// Evaluation outside the domain of a function that has no sensible extended
// value there (for example a gradient on the orthant boundary).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative routine failed to converge or detected an ill-posed instance.
// Carries the best value seen so callers can report partial progress.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double bestValue)
        : std::runtime_error(what), best_value(bestValue) {}
    explicit SolverError(const std::string& what)
        : std::runtime_error(what), best_value(0.0) {}
    double best_value;
};

// Malformed configuration file or command line.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace conemkt
