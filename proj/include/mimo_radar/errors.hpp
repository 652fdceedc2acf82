#pragma once

#include <stdexcept>
#include <string>

namespace mimo_radar {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
    InvalidArgument,
    Config,
    Numerical,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidDimensionError : public Error {
public:
    explicit InvalidDimensionError(const std::string& what)
        : Error(ErrorKind::InvalidArgument, "invalid dimension: " + what) {}
};

class InvalidArgumentError : public Error {
public:
    explicit InvalidArgumentError(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

/// Raised when a matrix that must have full column rank (or be positive
/// definite) is numerically singular. Carries the observed condition number.
class SingularSubspaceError : public Error {
public:
    SingularSubspaceError(const std::string& what, double condition)
        : Error(ErrorKind::Numerical,
                "singular subspace: " + what + " (condition number " + std::to_string(condition) + ")"),
          condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class OverdeterminedInterferenceError : public Error {
public:
    OverdeterminedInterferenceError(long q, long n)
        : Error(ErrorKind::InvalidArgument, "over-determined interference: Q = " + std::to_string(q) +
                                                " exceeds N = " + std::to_string(n)) {}
};

class CodeConstructionError : public Error {
public:
    explicit CodeConstructionError(const std::string& what)
        : Error(ErrorKind::InvalidArgument, "code construction: " + what) {}
};

class DegenerateGeometryError : public Error {
public:
    explicit DegenerateGeometryError(const std::string& what)
        : Error(ErrorKind::Numerical, "degenerate geometry: " + what) {}
};

class NotPositiveDefiniteError : public Error {
public:
    explicit NotPositiveDefiniteError(const std::string& what)
        : Error(ErrorKind::Numerical, "matrix not positive definite: " + what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, "config error: " + what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, "I/O error: " + what) {}
};

inline int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::InvalidArgument:
            return 2;
        case ErrorKind::Numerical:
            return 3;
        case ErrorKind::Io:
            return 4;
    }
    return 1;
}

}  // namespace mimo_radar
