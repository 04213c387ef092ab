// Error taxonomy for the estimation engine.  Each class maps to a process
// exit code so the command line tool can translate failures mechanically.
#pragma once

#include <stdexcept>
#include <string>

namespace qmed {

class EngineError : public std::runtime_error {
public:
    EngineError(const std::string& msg, int exit_code)
        : std::runtime_error(msg), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

// Input file is structurally unusable: missing header, missing column.
class SchemaError : public EngineError {
public:
    explicit SchemaError(const std::string& msg) : EngineError(msg, 2) {}
};

// A value is present but invalid (bad number, exposure outside {0,1}),
// or an API argument is out of its documented domain.
class ValidationError : public EngineError {
public:
    explicit ValidationError(const std::string& msg) : EngineError(msg, 3) {}
};

class ArgumentError : public ValidationError {
public:
    explicit ArgumentError(const std::string& msg) : ValidationError(msg) {}
};

// Estimation cannot proceed: rank-deficient design, degenerate arm,
// no positive sparsity value on the grid.
class EstimationError : public EngineError {
public:
    explicit EstimationError(const std::string& msg) : EngineError(msg, 4) {}
};

// Resampling inference failed, e.g. too many replicates were dropped.
class InferenceError : public EngineError {
public:
    explicit InferenceError(const std::string& msg) : EngineError(msg, 5) {}
};

} // namespace qmed
