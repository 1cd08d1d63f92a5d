#pragma once

#include <stdexcept>
#include <string>

namespace roska {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Syntax error while reading reward-program text. Carries 1-based position.
class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& message)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) +
                ": " + message),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Structurally valid text that violates a program invariant
/// (duplicate component name, non-positive temperature, unknown function).
class ValidationError : public Error {
public:
    using Error::Error;
};

class MissingFeature : public Error {
public:
    explicit MissingFeature(const std::string& name)
        : Error("reward program references feature '" + name + "' absent from the feature map"),
          name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Evaluation produced a non-finite value despite the guards; signals a bug.
class NonFiniteResult : public Error {
public:
    using Error::Error;
};

class UnknownEnv : public Error {
public:
    explicit UnknownEnv(const std::string& name) : Error("unknown environment '" + name + "'") {}
};

class ArchMismatch : public Error {
public:
    using Error::Error;
};

class AlphaOutOfRange : public Error {
public:
    explicit AlphaOutOfRange(double alpha)
        : Error("fusion ratio " + std::to_string(alpha) + " outside [0, 1]") {}
};

/// Reward program references a feature the environment does not export.
class FeatureMismatch : public Error {
public:
    using Error::Error;
};

class SingularKernel : public Error {
public:
    using Error::Error;
};

class MissingFeedback : public Error {
public:
    using Error::Error;
};

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

class DegenerateBaseline : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IncompleteRun : public Error {
public:
    using Error::Error;
};

}  // namespace roska
