#pragma once

#include <stdexcept>
#include <string>

namespace mrdf {

// Exit codes used by the CLI. Library code throws; the CLI maps to these.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitNumeric = 3,
};

// Malformed or inconsistent input data (manifests, feature files, checkpoints).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or violated numeric contracts at runtime.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace mrdf
