#include "coexsim/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "coexsim/errors.hpp"

namespace coexsim::analysis {

const char* to_string(TrafficClass c) {
    switch (c) {
        case TrafficClass::kIdle: return "idle";
        case TrafficClass::kIndication: return "indication";
        case TrafficClass::kNotification: return "notification";
    }
    return "?";
}

const char* to_string(DosOutcome o) {
    switch (o) {
        case DosOutcome::kDos: return "dos";
        case DosOutcome::kDegraded: return "degraded";
        case DosOutcome::kUnaffected: return "unaffected";
    }
    return "?";
}

OffsetStats reference_stats(TrafficClass c) {
    switch (c) {
        case TrafficClass::kIdle: return {-12.0, -27.0, 3.0, -190.0, 30.0};
        case TrafficClass::kIndication: return {-171.0, -183.0, -151.0, -306.0, 226.0};
        case TrafficClass::kNotification: return {-85.0, -100.0, -69.0, -286.0, 302.0};
    }
    return {};
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * (static_cast<double>(values.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

std::vector<OffsetSample> compute_slot_offsets(const std::vector<SimTime>& edges,
                                               SimTime slot_anchor) {
    std::vector<OffsetSample> out;
    out.reserve(edges.size());
    const std::int64_t slot_ns = 625'000;
    const std::int64_t half_ns = 312'500;
    for (SimTime edge : edges) {
        std::int64_t rel = delta_ns(edge, slot_anchor);
        std::int64_t m = (rel + half_ns) % slot_ns;
        if (m < 0) m += slot_ns;
        std::int64_t off = m - half_ns;          // in [-312500, 312500)
        if (off == -half_ns) off = half_ns;      // same residue, range (-312.5, +312.5]
        out.push_back(OffsetSample{static_cast<double>(off) / 1000.0});
    }
    return out;
}

SimTime estimate_slot_anchor(const std::vector<SimTime>& edges) {
    double best_score = std::numeric_limits<double>::infinity();
    SimTime best = SimTime::from_ns(0);
    for (std::uint64_t anchor_ns = 0; anchor_ns < 625'000; anchor_ns += 10'000) {
        const SimTime anchor = SimTime::from_ns(anchor_ns);
        const auto offsets = compute_slot_offsets(edges, anchor);
        std::vector<double> mags;
        mags.reserve(offsets.size());
        for (const auto& o : offsets) mags.push_back(std::fabs(o.offset_us));
        const double score = median(std::move(mags));
        if (score < best_score) {
            best_score = score;
            best = anchor;
        }
    }
    return best;
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Median of |N(0, s)| truncated to [0, bound].
double truncated_half_normal_median(double s, double bound) {
    const double mass = normal_cdf(bound / s) - 0.5;
    const double target = 0.5 + 0.5 * mass;
    double lo = 0.0;
    double hi = bound;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid / s) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Solve the scale so the truncated half-normal's median equals quartile_dist.
// The median grows monotonically with s and saturates at bound/2.
double solve_scale(double quartile_dist, double bound) {
    if (quartile_dist <= 0.0) return 1e-9;
    if (quartile_dist >= bound / 2.0) {
        throw Error("offset generator: quartile distance unreachable under whisker bound");
    }
    double lo = 1e-9;
    double hi = quartile_dist * 64.0;
    while (truncated_half_normal_median(hi, bound) < quartile_dist) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (truncated_half_normal_median(mid, bound) < quartile_dist ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

OffsetGenerator::OffsetGenerator(const OffsetStats& stats) : stats_(stats) {
    const double lo_bound = stats.median - stats.lower_whisker;
    const double up_bound = stats.upper_whisker - stats.median;
    if (lo_bound <= 0.0 || up_bound <= 0.0) {
        throw Error("offset generator: whiskers must straddle the median");
    }
    s_lo_ = solve_scale(stats.median - stats.lower_quartile, lo_bound);
    s_up_ = solve_scale(stats.upper_quartile - stats.median, up_bound);
}

double OffsetGenerator::sample(RngStream& stream) const {
    const bool lower = stream.next_unit() < 0.5;
    const double scale = lower ? s_lo_ : s_up_;
    const double bound = lower ? stats_.median - stats_.lower_whisker
                               : stats_.upper_whisker - stats_.median;
    double magnitude = 0.0;
    do {
        magnitude = std::fabs(stream.next_gaussian()) * scale;
    } while (magnitude > bound);
    return lower ? stats_.median - magnitude : stats_.median + magnitude;
}

std::vector<OffsetSample> OffsetGenerator::samples(RngStream& stream, std::size_t n) const {
    std::vector<OffsetSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(OffsetSample{sample(stream)});
    return out;
}

Classification classify_traffic(const std::vector<OffsetSample>& samples) {
    if (samples.size() < 20) {
        throw TooFewSamplesError("classify_traffic: at least 20 samples required");
    }
    std::vector<double> values;
    values.reserve(samples.size());
    for (const auto& s : samples) values.push_back(s.offset_us);
    const double m = median(std::move(values));

    constexpr std::array<TrafficClass, 3> classes = {
        TrafficClass::kIdle, TrafficClass::kIndication, TrafficClass::kNotification};
    double best = std::numeric_limits<double>::infinity();
    double second = best;
    TrafficClass label = TrafficClass::kIdle;
    for (TrafficClass c : classes) {
        const double d = std::fabs(m - reference_stats(c).median);
        if (d < best) {
            second = best;
            best = d;
            label = c;
        } else if (d < second) {
            second = d;
        }
    }
    return Classification{label, second - best, m};
}

KeystrokeTimeline reconstruct_keystrokes(
    const std::vector<std::pair<SimTime, std::uint8_t>>& polls) {
    KeystrokeTimeline timeline;
    bool in_run = false;
    for (const auto& [at, byte] : polls) {
        if (byte == 0x85) {
            if (!in_run) {
                timeline.detections.push_back({at, 1.0});
                in_run = true;
            }
        } else {
            in_run = false;
        }
    }
    return timeline;
}

DosOutcome detect_dos(const std::vector<std::pair<SimTime, double>>& traffic_series,
                      std::pair<SimTime, SimTime> attack_window) {
    double pre_sum = 0.0;
    double in_sum = 0.0;
    std::size_t pre_n = 0;
    std::size_t in_n = 0;
    for (const auto& [at, rate] : traffic_series) {
        if (at < attack_window.first) {
            pre_sum += rate;
            ++pre_n;
        } else if (at < attack_window.second) {
            in_sum += rate;
            ++in_n;
        }
    }
    const double pre = pre_n ? pre_sum / static_cast<double>(pre_n) : 0.0;
    const double in = in_n ? in_sum / static_cast<double>(in_n) : 0.0;
    if (in == 0.0 && pre > 0.0) return DosOutcome::kDos;
    if (in > 0.0 && in < pre) return DosOutcome::kDegraded;
    return DosOutcome::kUnaffected;
}

}  // namespace coexsim::analysis
