#pragma once

#include <stdexcept>
#include <string>

namespace vssea {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A function was called outside its documented domain.
class PreconditionViolation : public Error {
public:
    using Error::Error;
};

// beam_mechanics
class NoConvergence : public Error {
public:
    using Error::Error;
};
class SlopeOutOfRange : public Error {
public:
    using Error::Error;
};
class QuadratureFailure : public Error {
public:
    using Error::Error;
};
class DeflectionUnreachable : public Error {
public:
    using Error::Error;
};

// vsam
class DeflectionLimitExceeded : public Error {
public:
    using Error::Error;
};
class InfeasibleGeometry : public Error {
public:
    using Error::Error;
};

// dynamics / experiments
class NonFiniteState : public Error {
public:
    using Error::Error;
};
class SimulationDiverged : public Error {
public:
    using Error::Error;
};

// cli_io
class ConfigError : public Error {
public:
    using Error::Error;
};

class ParseError : public ConfigError {
public:
    ParseError(const std::string& msg, int line, int column)
        : ConfigError("parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + msg),
          line_(line),
          column_(column)
    {
    }
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

class UnknownKey : public ConfigError {
public:
    explicit UnknownKey(const std::string& key)
        : ConfigError("unknown configuration key '" + key + "'"), key_(key)
    {
    }
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Carries the module and the invariant that failed.
class ValidationError : public ConfigError {
public:
    ValidationError(std::string module, std::string invariant)
        : ConfigError("validation failed in " + module + ": " + invariant),
          module_(std::move(module)),
          invariant_(std::move(invariant))
    {
    }
    const std::string& module() const noexcept { return module_; }
    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string module_;
    std::string invariant_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace vssea
