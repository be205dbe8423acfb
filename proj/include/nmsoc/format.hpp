#pragma once

#include <charconv>
#include <string>

namespace nmsoc {

/// Shortest round-trip decimal rendering; integers print without a point.
template <typename T>
std::string format_number(T value)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, r.ptr);
}

/// Fixed-precision rendering used for CSV telemetry.
inline std::string format_fixed(double value, int precision = 6)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, precision);
    return std::string(buf, r.ptr);
}

} // namespace nmsoc
