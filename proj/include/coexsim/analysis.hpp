#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "coexsim/rng.hpp"
#include "coexsim/time.hpp"

namespace coexsim::analysis {

inline constexpr double kSlotUs = 625.0;
inline constexpr double kHalfSlotUs = 312.5;

/// REQUEST edge time reduced modulo the 625 us slot grid, mapped into
/// (-312.5, +312.5] us.
struct OffsetSample {
    double offset_us = 0.0;
};

/// Boxplot summary of a traffic class's slot-offset distribution (all us).
struct OffsetStats {
    double median = 0.0;
    double lower_quartile = 0.0;
    double upper_quartile = 0.0;
    double lower_whisker = 0.0;
    double upper_whisker = 0.0;
};

enum class TrafficClass { kIdle, kIndication, kNotification };
const char* to_string(TrafficClass c);

/// Boxplot statistics read from the measured REQUEST-offset figure.
OffsetStats reference_stats(TrafficClass c);

std::vector<OffsetSample> compute_slot_offsets(const std::vector<SimTime>& edges,
                                               SimTime slot_anchor);

/// Picks the anchor on a 10 us grid within one slot that minimizes the median
/// absolute offset (attacker self-synchronization when the slot phase is
/// unknown).
SimTime estimate_slot_anchor(const std::vector<SimTime>& edges);

/// Two-piece truncated half-Gaussian generator matching a boxplot summary by
/// construction: the median is the piece boundary, each side's scale is
/// solved so the quartile lands exactly, and the whiskers act as hard bounds.
class OffsetGenerator {
public:
    explicit OffsetGenerator(const OffsetStats& stats);

    double sample(RngStream& stream) const;
    std::vector<OffsetSample> samples(RngStream& stream, std::size_t n) const;

    const OffsetStats& stats() const { return stats_; }
    double lower_scale() const { return s_lo_; }
    double upper_scale() const { return s_up_; }

private:
    OffsetStats stats_;
    double s_lo_ = 1.0;
    double s_up_ = 1.0;
};

struct Classification {
    TrafficClass label = TrafficClass::kIdle;
    double confidence = 0.0;  // margin between best and second-best distance, us
    double sample_median = 0.0;
};

/// Nearest-reference-median classification. Throws TooFewSamplesError when
/// fewer than 20 samples are supplied.
Classification classify_traffic(const std::vector<OffsetSample>& samples);

struct KeystrokeTimeline {
    struct Detection {
        SimTime at;
        double confidence = 1.0;
    };
    std::vector<Detection> detections;  // strictly increasing times
};

/// One detection per maximal run of keystroke-type polls (0x85); the
/// detection carries the first poll time of the run.
KeystrokeTimeline reconstruct_keystrokes(const std::vector<std::pair<SimTime, std::uint8_t>>& polls);

enum class DosOutcome { kDos, kDegraded, kUnaffected };
const char* to_string(DosOutcome o);

/// Rate-based outcome: dos when a previously active flow stops entirely
/// inside the window, degraded when it merely drops.
DosOutcome detect_dos(const std::vector<std::pair<SimTime, double>>& traffic_series,
                      std::pair<SimTime, SimTime> attack_window);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

}  // namespace coexsim::analysis
