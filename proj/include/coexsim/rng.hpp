#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace coexsim {

/// Independent deterministic random stream. Streams are derived from a run
/// seed plus a stable label ("pta-jitter", "seci-jitter", "fuzzer",
/// "traffic"), so adding draws to one stream never perturbs another.
///
/// All distribution sampling is implemented here rather than with
/// std::<distribution> types, whose output is not pinned by the standard;
/// this keeps traces bit-identical across compilers.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view stream_id);

    std::uint64_t seed() const { return seed_; }
    const std::string& stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit();

    /// Standard normal deviate (Box-Muller, one value per call).
    double next_gaussian();

    /// Uniform integer in [lo, hi] inclusive.
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);

private:
    std::uint64_t seed_;
    std::string stream_id_;
    std::mt19937_64 engine_;
};

/// Zero-mean jitter draw with standard deviation `sigma_ns`, truncated to
/// [-bound_ns, +bound_ns] by rejection. sigma_ns == 0 always yields 0.
/// Throws PreconditionError if bound_ns == 0.
std::int64_t sample_jitter(RngStream& stream, std::uint64_t sigma_ns, std::uint64_t bound_ns);

}  // namespace coexsim
