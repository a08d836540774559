#pragma once

#include <charconv>
#include <string>
#include <system_error>

#include "flocksim/errors.hpp"

namespace flocksim {

// Shortest round-trip decimal form; keeps serialize(parse(...)) idempotent.
inline std::string num_to_string(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const char* what) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (begin != end && *begin == '+') ++begin; // from_chars rejects a leading '+'
    double v = 0;
    auto res = std::from_chars(begin, end, v);
    if (begin == end || res.ec != std::errc() || res.ptr != end)
        throw ConfigError(std::string("bad numeric value for ") + what + ": '" + s + "'");
    return v;
}

inline long parse_long(const std::string& s, const char* what) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError(std::string("bad integer value for ") + what + ": '" + s + "'");
    return v;
}

} // namespace flocksim
