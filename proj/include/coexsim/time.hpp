#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace coexsim {

/// Simulation clock value: integer nanoseconds since t=0.
/// Used for both instants and durations; the 64-bit range covers
/// centuries, far beyond the minutes-long runs simulated here.
class SimTime {
public:
    constexpr SimTime() = default;

    static constexpr SimTime from_ns(std::uint64_t v) { return SimTime{v}; }
    static constexpr SimTime from_us(std::uint64_t v) { return SimTime{v * 1'000ull}; }
    static constexpr SimTime from_ms(std::uint64_t v) { return SimTime{v * 1'000'000ull}; }
    static constexpr SimTime from_s(std::uint64_t v) { return SimTime{v * 1'000'000'000ull}; }

    constexpr std::uint64_t ns() const { return ns_; }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime& operator+=(SimTime other) {
        ns_ += other.ns_;
        return *this;
    }

    friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.ns_ + b.ns_}; }

    /// Unsigned difference; callers must know a >= b (clamped to 0 otherwise).
    friend constexpr SimTime operator-(SimTime a, SimTime b) {
        return SimTime{a.ns_ >= b.ns_ ? a.ns_ - b.ns_ : 0};
    }

private:
    constexpr explicit SimTime(std::uint64_t v) : ns_{v} {}
    std::uint64_t ns_ = 0;
};

/// Signed difference a - b in nanoseconds.
constexpr std::int64_t delta_ns(SimTime a, SimTime b) {
    return static_cast<std::int64_t>(a.ns()) - static_cast<std::int64_t>(b.ns());
}

/// Shift an instant by a signed offset, clamping at t=0.
constexpr SimTime shift_ns(SimTime t, std::int64_t offset) {
    const auto base = static_cast<std::int64_t>(t.ns());
    const auto shifted = base + offset;
    return SimTime::from_ns(shifted > 0 ? static_cast<std::uint64_t>(shifted) : 0);
}

/// Floor to a multiple of `grid` (grid must be nonzero).
constexpr SimTime quantize_down(SimTime t, SimTime grid) {
    return SimTime::from_ns(t.ns() - t.ns() % grid.ns());
}

std::string format_duration(SimTime t);

/// Parses "625us", "1.25ms", "3s", "120s" or a bare integer (ns).
SimTime parse_duration(const std::string& text);

}  // namespace coexsim
