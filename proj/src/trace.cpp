#include "coexsim/trace.hpp"

#include <ostream>
#include <sstream>

#include "coexsim/errors.hpp"

namespace coexsim {

void TraceRecorder::append(SimTime at, std::string_view channel, TraceValue value) {
    if (!records_.empty() && at < records_.back().at) {
        throw Error("trace: record at " + format_duration(at) + " before " +
                    format_duration(records_.back().at) + " on " + std::string(channel));
    }
    records_.push_back(Record{at, std::string(channel), std::move(value)});
}

void TraceRecorder::record(SimTime at, std::string_view channel, std::int64_t value) {
    append(at, channel, value);
    last_int_[std::string(channel)] = value;
}

void TraceRecorder::record_bytes(SimTime at, std::string_view channel,
                                 std::span<const std::uint8_t> payload) {
    append(at, channel, std::vector<std::uint8_t>(payload.begin(), payload.end()));
}

void TraceRecorder::record_change(SimTime at, std::string_view channel, std::int64_t value) {
    const auto it = last_int_.find(std::string(channel));
    if (it != last_int_.end() && it->second == value) return;
    record(at, channel, value);
}

void TraceRecorder::write_csv(std::ostream& out) const {
    out << "time_ns,channel,value\n";
    for (const auto& rec : records_) {
        out << rec.at.ns() << ',' << rec.channel << ',';
        if (std::holds_alternative<std::int64_t>(rec.value)) {
            out << std::get<std::int64_t>(rec.value);
        } else {
            static constexpr char hex[] = "0123456789abcdef";
            out << "0x";
            for (std::uint8_t b : std::get<std::vector<std::uint8_t>>(rec.value)) {
                out << hex[b >> 4] << hex[b & 0xf];
            }
        }
        out << '\n';
    }
}

std::string TraceRecorder::to_csv() const {
    std::ostringstream out;
    write_csv(out);
    return out.str();
}

}  // namespace coexsim
