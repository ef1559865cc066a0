#ifndef EISTWIST_ERRORS_HPP
#define EISTWIST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace eistwist {

// All failure modes surface as typed exceptions. Suites catch them and turn
// them into failed check records; they never abort a whole run.

struct PoleError : std::domain_error {
    explicit PoleError(const std::string& m) : std::domain_error(m) {}
};

struct DomainError : std::domain_error {
    explicit DomainError(const std::string& m) : std::domain_error(m) {}
};

struct ConvergenceRegionError : std::domain_error {
    explicit ConvergenceRegionError(const std::string& m) : std::domain_error(m) {}
};

struct TailTooLargeError : std::runtime_error {
    explicit TailTooLargeError(const std::string& m) : std::runtime_error(m) {}
};

struct MaxEvaluationsError : std::runtime_error {
    explicit MaxEvaluationsError(const std::string& m) : std::runtime_error(m) {}
};

struct NonFiniteError : std::runtime_error {
    explicit NonFiniteError(const std::string& m) : std::runtime_error(m) {}
};

struct IdentityInputError : std::invalid_argument {
    explicit IdentityInputError(const std::string& m) : std::invalid_argument(m) {}
};

struct UnsupportedLevelError : std::invalid_argument {
    explicit UnsupportedLevelError(const std::string& m) : std::invalid_argument(m) {}
};

struct UnsupportedCuspError : std::invalid_argument {
    explicit UnsupportedCuspError(const std::string& m) : std::invalid_argument(m) {}
};

struct UnsupportedPrimeError : std::invalid_argument {
    explicit UnsupportedPrimeError(const std::string& m) : std::invalid_argument(m) {}
};

struct TruncationInsufficientError : std::runtime_error {
    explicit TruncationInsufficientError(const std::string& m) : std::runtime_error(m) {}
};

struct EnvelopeViolationError : std::runtime_error {
    explicit EnvelopeViolationError(const std::string& m) : std::runtime_error(m) {}
};

struct IllConditionedError : std::runtime_error {
    explicit IllConditionedError(const std::string& m) : std::runtime_error(m) {}
};

struct ContinuationUnavailableError : std::domain_error {
    explicit ContinuationUnavailableError(const std::string& m) : std::domain_error(m) {}
};

struct ValidationFailureError : std::runtime_error {
    explicit ValidationFailureError(const std::string& m) : std::runtime_error(m) {}
};

struct PoleHitError : std::runtime_error {
    explicit PoleHitError(const std::string& m) : std::runtime_error(m) {}
};

struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& m) : std::runtime_error(m) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

} // namespace eistwist

#endif
