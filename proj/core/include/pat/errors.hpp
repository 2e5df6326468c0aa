#pragma once

#include <stdexcept>
#include <string>

namespace pat {

// Error classes map one-to-one onto the CLI exit codes
// (config -> 2, numerics -> 3, I/O -> 4).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pat
