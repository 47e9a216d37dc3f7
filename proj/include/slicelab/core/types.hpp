#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace slicelab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Simulation time in integer microseconds.
using Micros = std::int64_t;

inline constexpr Micros kMicrosPerMs = 1000;

/// Per-slice service level agreement: packets must see end-to-end latency
/// below `lambda_ms`, and at least a `phi_sla` fraction of them must do so.
struct SlaSpec {
    double lambda_ms = 110.0;
    double phi_sla = 0.99;

    /// Throws Error unless lambda_ms > 0 and 0 < phi_sla <= 1.
    void validate() const;

    friend bool operator==(const SlaSpec&, const SlaSpec&) = default;
};

struct SliceId {
    std::uint32_t index = 0;

    friend auto operator<=>(const SliceId&, const SliceId&) = default;
};

struct EpochIndex {
    std::uint32_t n = 0;

    friend auto operator<=>(const EpochIndex&, const EpochIndex&) = default;
};

/// PRBs granted to one slice for one decision epoch.
struct SlicingAction {
    int prbs = 1;

    friend auto operator<=>(const SlicingAction&, const SlicingAction&) = default;
};

/// Largest admissible action: every other slice keeps at least one PRB.
constexpr int max_action(int capacity, int num_slices) {
    return capacity - (num_slices - 1);
}

/// Throws Error when `a` is outside [1, max_action(capacity, num_slices)].
void validate_action(SlicingAction a, int capacity, int num_slices);

/// The nine-feature agent observation, in its fixed order:
/// tb, rt, dl, d_min, d_max, d_mean, phi_sla, phi_meas, lambda.
struct Observation {
    static constexpr std::size_t kSize = 9;

    double tb = 0.0;
    double rt = 1.0;
    double dl = 0.0;
    double d_min_ms = 0.0;
    double d_max_ms = 0.0;
    double d_mean_ms = 0.0;
    double phi_sla = 1.0;
    double phi_meas = 1.0;
    double lambda_ms = 1.0;

    std::array<double, kSize> to_array() const;
    static Observation from_array(std::span<const double> v);

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Feature names, in vector order.
const std::array<std::string, Observation::kSize>& observation_feature_names();

struct Transition {
    Observation state;
    SlicingAction action;
    double reward = 0.0;
    Observation next_state;
    std::int64_t episode = 0;
    EpochIndex epoch;
    SliceId slice;

    friend bool operator==(const Transition&, const Transition&) = default;
};

enum class RewardIndicator { as_written, corrected };

RewardIndicator parse_reward_indicator(const std::string& s);
std::string to_string(RewardIndicator r);

}  // namespace slicelab
