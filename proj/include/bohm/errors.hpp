#pragma once

#include <stdexcept>
#include <string>

namespace bohm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on arguments was violated (dimension mismatch, bad widths, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// |psi| fell to or below node_eps where the guidance velocity was requested.
class NodeProximity : public Error {
public:
    using Error::Error;
};

/// Adaptive step size underflowed during trajectory integration.
class StepCollapse : public Error {
public:
    using Error::Error;
};

/// Rejection sampler acceptance rate dropped below the usable floor.
class EnvelopeFailure : public Error {
public:
    using Error::Error;
};

class QuadratureNonConvergence : public Error {
public:
    using Error::Error;
};

/// Two superposition terms share an energy, so their cross term never decays.
class DegenerateFrequencies : public Error {
public:
    using Error::Error;
};

/// Every trial of a time average failed to integrate.
class AllTrialsFailed : public Error {
public:
    using Error::Error;
};

/// Malformed JSON text; carries line and column of the failure.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what), line_(line), column_(column) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed JSON that does not satisfy the scenario schema.
class SchemaError : public Error {
public:
    SchemaError(const std::string& key, const std::string& what)
        : Error(key + ": " + what), key_(key) {}
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Refusal to emit a non-finite statistic.
class SerializationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace bohm
