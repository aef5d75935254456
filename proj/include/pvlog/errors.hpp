#pragma once

#include <stdexcept>
#include <string>

namespace pvlog {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad run config, unreadable input, malformed manifest.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Structured provider output that failed schema or JSON parsing.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Domain invariant violated on a deserialized or constructed document.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Failure talking to an external model service.
class ProviderError : public Error {
public:
    ProviderError(const std::string& msg, bool retryable)
        : Error(msg), retryable(retryable) {}
    bool retryable;
};

/// A pipeline or MACF stage failed after provider retries were exhausted.
class StageError : public Error {
public:
    StageError(std::string stage_name, const std::string& msg)
        : Error("[" + stage_name + "] " + msg), stage(std::move(stage_name)) {}
    std::string stage;
};

} // namespace pvlog
