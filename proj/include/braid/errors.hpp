#pragma once

#include <stdexcept>
#include <string>

namespace braid {

// Input outside the domain of a formula (negative discriminant, x <= 0 for K, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A truncated series or iteration did not reach its tolerance.
class NonConvergence : public std::runtime_error {
public:
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

// Configuration or parameter validation failure.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace braid
