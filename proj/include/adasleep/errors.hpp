#pragma once

#include <stdexcept>
#include <string>

namespace adasleep {

// Invalid configuration or malformed manifest/config input.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or degenerate data (non-monotone timestamps, too few samples, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Model estimation failed (EM non-improvement, single-class training set, ...).
class FittingError : public std::runtime_error {
public:
    explicit FittingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace adasleep
