#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nmsoc {

/// Dense node index inside a topology graph. Cores of a fullerene domain
/// occupy 12..31, so every core id fits the 5-bit core-id field.
using NodeId = std::uint32_t;
using CoreId = NodeId;

inline constexpr int kCoreIdBits = 5;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Text-format error carrying the offending source and 1-based line.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& message)
        : Error(source + ":" + std::to_string(line) + ": " + message), line_(line)
    {
    }

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

class BusyError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class RoutingError : public Error {
public:
    using Error::Error;
};

class PlacementError : public Error {
public:
    using Error::Error;
};

class DeadlockError : public Error {
public:
    using Error::Error;
};

class WatchdogError : public Error {
public:
    using Error::Error;
};

} // namespace nmsoc
