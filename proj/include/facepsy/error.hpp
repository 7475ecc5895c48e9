#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace facepsy {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Input data violates a documented invariant. Carries every violation found.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::string message)
        : std::runtime_error(message), violations_{std::move(message)} {}
    explicit ValidationError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Malformed input file; line is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what);

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Operation is illegal in the current state (wrong phase, duplicate, already completed).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Missing or wrong session or admin token.
class UnauthorizedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Catalog cannot supply the requested trial material.
class InsufficientMaterialError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Psychometric parameters cannot be identified from the data.
class UnidentifiableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Event log failed structural checks (sequence gap, inconsistent transition).
class CorruptLogError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace facepsy
