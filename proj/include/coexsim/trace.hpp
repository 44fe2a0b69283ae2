#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "coexsim/time.hpp"

namespace coexsim {

using TraceValue = std::variant<std::int64_t, std::vector<std::uint8_t>>;

/// Append-only signal recorder, playing the role of a bench logic analyzer.
/// Records are strictly time-ordered; channel names are stable identifiers.
class TraceRecorder {
public:
    struct Record {
        SimTime at;
        std::string channel;
        TraceValue value;
    };

    void record(SimTime at, std::string_view channel, std::int64_t value);
    void record_bytes(SimTime at, std::string_view channel, std::span<const std::uint8_t> payload);

    /// Records only if the value differs from the channel's previous record.
    void record_change(SimTime at, std::string_view channel, std::int64_t value);

    const std::vector<Record>& records() const { return records_; }

    /// CSV export: header `time_ns,channel,value`; integers rendered decimal,
    /// payloads as lowercase hex prefixed 0x.
    void write_csv(std::ostream& out) const;
    std::string to_csv() const;

private:
    void append(SimTime at, std::string_view channel, TraceValue value);

    std::vector<Record> records_;
    std::unordered_map<std::string, std::int64_t> last_int_;
};

}  // namespace coexsim
