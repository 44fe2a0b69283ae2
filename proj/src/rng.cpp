#include "coexsim/rng.hpp"

#include <cmath>
#include <numbers>

#include "coexsim/errors.hpp"

namespace coexsim {

namespace {

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x00000100000001b3ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(splitmix64(seed ^ fnv1a(stream_id))) {}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
    double u1 = 0.0;
    do {
        u1 = next_unit();
    } while (u1 <= 0.0);
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::uniform(std::uint64_t lo, std::uint64_t hi) {
    if (lo >= hi) return lo;
    const std::uint64_t span = hi - lo + 1;
    return lo + (span == 0 ? next_u64() : next_u64() % span);
}

std::int64_t sample_jitter(RngStream& stream, std::uint64_t sigma_ns, std::uint64_t bound_ns) {
    if (bound_ns == 0) throw PreconditionError("sample_jitter: bound_ns must be > 0");
    if (sigma_ns == 0) return 0;
    const auto bound = static_cast<double>(bound_ns);
    for (;;) {
        const double draw = stream.next_gaussian() * static_cast<double>(sigma_ns);
        if (draw >= -bound && draw <= bound) {
            return static_cast<std::int64_t>(std::llround(draw));
        }
    }
}

}  // namespace coexsim
