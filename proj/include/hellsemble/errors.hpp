#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hellsemble {

/// Base error. `code()` is a stable machine-parsable token (e.g.
/// "MissingLabelColumn"); `what()` is "<code>: <detail>".
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Malformed configuration (bad JSON, unknown keys, invalid enum values).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Problems with input data: ingestion, splitting, dimension mismatches.
class DataError : public Error {
public:
    using Error::Error;
};

/// Failures raised while fitting models or ensembles.
class TrainError : public Error {
public:
    using Error::Error;
};

}  // namespace hellsemble
