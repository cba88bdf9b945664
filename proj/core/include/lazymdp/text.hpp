#pragma once

#include "lazymdp/types.hpp"

#include <charconv>
#include <string>
#include <string_view>

namespace lazymdp {

/// Shortest decimal form that parses back to the exact same double.
inline std::string to_decimal(Real value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

/// Fixed significant-digit decimal form (general format).
inline std::string to_decimal(Real value, int significant_digits) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value,
                             std::chars_format::general, significant_digits);
    return std::string(buf, res.ptr);
}

/// Parses a decimal literal; throws std::invalid_argument on trailing junk.
inline Real parse_real(std::string_view token) {
    Real value = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw std::invalid_argument("not a real number: '" + std::string(token) + "'");
    return value;
}

inline long parse_long(std::string_view token) {
    long value = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw std::invalid_argument("not an integer: '" + std::string(token) + "'");
    return value;
}

}  // namespace lazymdp
