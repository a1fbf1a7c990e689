#pragma once

#include <stdexcept>
#include <string>

namespace fedcontrib {

// Error taxonomy mirrored by the CLI exit codes: usage = 1, data = 2, numeric = 3.

class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fedcontrib
