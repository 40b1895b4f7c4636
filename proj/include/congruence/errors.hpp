#pragma once

#include <stdexcept>
#include <string>

namespace congruence {

// Scene/expression text could not be parsed. CLI exit code 2.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t position)
        : std::runtime_error(std::move(message)), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

// Geometric precondition violated (degenerate metric, isotropic normal,
// isotropic bending argument, definite metric where a cone is required, ...).
// CLI exit code 3.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Evaluation left the domain of a partial function (log, sqrt, division).
class EvalDomainError : public GeometryError {
public:
    EvalDomainError(const std::string& what, std::string subexpr)
        : GeometryError(what + " in subexpression: " + subexpr),
          subexpr_(std::move(subexpr)) {}
    const std::string& subexpression() const { return subexpr_; }

private:
    std::string subexpr_;
};

// Filesystem trouble. CLI exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace congruence
