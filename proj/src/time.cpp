#include "coexsim/time.hpp"

#include <cctype>
#include <cstdio>

#include "coexsim/errors.hpp"

namespace coexsim {

std::string format_duration(SimTime t) {
    char buf[40];
    const std::uint64_t v = t.ns();
    if (v % 1'000'000'000ull == 0) {
        std::snprintf(buf, sizeof buf, "%llus", static_cast<unsigned long long>(v / 1'000'000'000ull));
    } else if (v % 1'000'000ull == 0) {
        std::snprintf(buf, sizeof buf, "%llums", static_cast<unsigned long long>(v / 1'000'000ull));
    } else if (v % 1'000ull == 0) {
        std::snprintf(buf, sizeof buf, "%lluus", static_cast<unsigned long long>(v / 1'000ull));
    } else {
        std::snprintf(buf, sizeof buf, "%lluns", static_cast<unsigned long long>(v));
    }
    return buf;
}

SimTime parse_duration(const std::string& text) {
    if (text.empty()) throw ConfigError("duration", "empty duration");

    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("duration", "not a number: '" + text + "'");
    }
    if (value < 0) throw ConfigError("duration", "negative duration: '" + text + "'");

    std::string unit = text.substr(pos);
    while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.front()))) unit.erase(0, 1);

    double scale = 1.0;
    if (unit.empty() || unit == "ns") {
        scale = 1.0;
    } else if (unit == "us") {
        scale = 1e3;
    } else if (unit == "ms") {
        scale = 1e6;
    } else if (unit == "s") {
        scale = 1e9;
    } else if (unit == "min") {
        scale = 60e9;
    } else {
        throw ConfigError("duration", "unknown unit '" + unit + "' in '" + text + "'");
    }
    return SimTime::from_ns(static_cast<std::uint64_t>(value * scale + 0.5));
}

}  // namespace coexsim
