#pragma once

#include <stdexcept>
#include <string>

namespace sortbench {

// Invalid run configuration or malformed arguments (bad rank, size
// mismatch, empty grid). Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Internal misuse that would corrupt a run: nested compute sections,
// tracked-free exceeding the balance, out-of-range kernel indices,
// undelivered traffic at world shutdown. Aborts the world.
class ProgrammingError : public std::logic_error {
public:
    explicit ProgrammingError(const std::string& what)
        : std::logic_error(what) {}
};

// All ranks blocked with no message able to unblock any of them. The
// message names the blocked ranks and what each is waiting on.
class DeadlockError : public std::runtime_error {
public:
    explicit DeadlockError(const std::string& what)
        : std::runtime_error(what) {}
};

// A run produced output that failed the sorted/permutation check. No
// report row is ever emitted for such a run. Maps to CLI exit code 1.
class VerificationError : public std::runtime_error {
public:
    explicit VerificationError(const std::string& what)
        : std::runtime_error(what) {}
};

// Least-squares calibration could not be performed (too few or too
// degenerate measurements). The message lists what is missing.
class CalibrationError : public std::runtime_error {
public:
    explicit CalibrationError(const std::string& what)
        : std::runtime_error(what) {}
};

} // namespace sortbench
